from scatterkit.factored.transform import (
    RHO_MAX_DEFAULT,
    RHO_MIN_DEFAULT,
    TransformParams,
    forward_transform,
    inverse_transform,
)
from scatterkit.factored.svd import truncated_svd
from scatterkit.factored.model import (
    ChannelFactors,
    FactoredBSSRDF,
    compress,
    evaluate_pair,
    mac_terms_per_eval,
    reconstruct,
    reconstruction_rmse,
)
from scatterkit.factored.archive import (
    load_factored_archive,
    save_factored_archive,
    storage_bytes,
)

__all__ = [
    "ChannelFactors",
    "FactoredBSSRDF",
    "RHO_MAX_DEFAULT",
    "RHO_MIN_DEFAULT",
    "TransformParams",
    "compress",
    "evaluate_pair",
    "forward_transform",
    "inverse_transform",
    "load_factored_archive",
    "mac_terms_per_eval",
    "reconstruct",
    "reconstruction_rmse",
    "save_factored_archive",
    "storage_bytes",
    "truncated_svd",
]
