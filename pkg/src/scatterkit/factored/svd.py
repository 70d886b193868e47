"""Rank-k truncation via singular value decomposition.

Truncating the SVD at rank k is the best rank-k approximation in the
Frobenius sense, so the only quality knobs that remain upstream are the
range transform and k itself.
"""

from __future__ import annotations

import numpy as np

from scatterkit.errors import ConvergenceFailureError, InvalidInputError


def truncated_svd(matrix: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (u, s, v) with u (n_i, k), s (k,) nonincreasing, v (n_o, k).

    The input is approximated by u @ diag(s) @ v.T. k must satisfy
    1 <= k <= min(matrix.shape).
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix contains non-finite values")
    k = int(k)
    if not (1 <= k <= min(a.shape)):
        raise InvalidInputError(f"k={k} outside [1, {min(a.shape)}] for shape {a.shape}")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(f"SVD did not converge: {exc}") from exc
    return u[:, :k].copy(), s[:k].copy(), vt[:k].T.copy()
