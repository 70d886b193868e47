"""The bundled synthetic material suite and materials-directory scanning.

Eight named materials, each generated in a heterogeneous variant (its own
extinction pattern, factored at rank 10 and 1) and a homogeneous variant
(uniform extinction, rank 1). Sixteen renderable materials total, which is
what the benchmark suite and the service expose out of the box.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from scatterkit.errors import InvalidInputError, IoFailureError
from scatterkit.factored.archive import save_factored_archive
from scatterkit.factored.model import compress
from scatterkit.ga.evolve import evolve
from scatterkit.ga.types import GaConfig
from scatterkit.materials.archive import (
    load_dipole_material,
    load_material_archive,
    save_material_archive,
)
from scatterkit.materials.synth import Pattern, synthesize_heterogeneous
from scatterkit.materials.types import MaterialDescriptor, MaterialType

SUITE_SAMPLE_COUNT = 64
HETERO_RANKS = (10, 1)
_HOMO_SEED_SHIFT = 100

# name, extinction pattern of the heterogeneous variant, synthesis seed
SUITE: tuple[tuple[str, Pattern, int], ...] = (
    ("Yellow Wax", Pattern.UNIFORM, 11),
    ("Jade", Pattern.VEINED_MARBLE, 3),
    ("Blue Wax", Pattern.UNIFORM, 5),
    ("Artificial Stone", Pattern.VEINED_MARBLE, 13),
    ("Chessboard 4x4", Pattern.CHESSBOARD4, 1),
    ("Chessboard 8x8", Pattern.CHESSBOARD8, 2),
    ("Marble Close-up", Pattern.VEINED_MARBLE, 7),
    ("Densely Veined Marble", Pattern.VEINED_MARBLE, 9),
)

PLACEHOLDER_DIPOLE = {
    "name": "Placeholder Wax",
    "sigma_s_prime": [10.0, 11.0, 12.0],
    "sigma_a": [0.2, 0.25, 0.3],
    "eta": 1.4,
    "units": "1/m",
}

# Small but honest search: enough breeding to move off a bad init while the
# whole 24-run generation pass stays under a minute.
LIBRARY_GA = GaConfig(population_size=16, max_generations=20, convergence_window=5)


def slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


@dataclass(frozen=True)
class LibraryEntry:
    """One renderable material on disk: the measured archive plus the
    factored variants that have been built for it."""

    descriptor: MaterialDescriptor
    measured_path: Path
    factored_paths: dict[int, Path] = field(default_factory=dict)

    @property
    def default_factored_path(self) -> Path:
        try:
            return self.factored_paths[self.descriptor.k_parameter]
        except KeyError:
            raise InvalidInputError(
                f"{self.descriptor.name}: no factored archive at"
                f" k={self.descriptor.k_parameter}"
            ) from None


def _variant_stem(name: str, material_type: MaterialType) -> str:
    suffix = "hetero" if material_type is MaterialType.HETEROGENEOUS else "homo"
    return f"{slugify(name)}-{suffix}"


def factored_path_for(root: Path, stem: str, k: int) -> Path:
    return Path(root) / f"{stem}-k{k}.gpsf"


def _build_variant(
    root: Path,
    name: str,
    material_type: MaterialType,
    pattern: Pattern,
    seed: int,
    ranks: tuple[int, ...],
    force: bool,
    progress: Callable[[str], None] | None,
) -> LibraryEntry:
    stem = _variant_stem(name, material_type)
    measured = root / f"{stem}.gpss"
    samples, matrices = (None, None)

    if force or not measured.exists():
        samples, matrices = synthesize_heterogeneous(SUITE_SAMPLE_COUNT, pattern, seed=seed)
        save_material_archive(measured, name, material_type, ranks[0], samples, matrices)
        if progress:
            progress(f"wrote {measured.name}")

    factored_paths = {}
    for k in ranks:
        target = factored_path_for(root, stem, k)
        if force or not target.exists():
            if matrices is None:
                _, samples, matrices = load_material_archive(measured)
            result = evolve(matrices, k, dataclasses.replace(LIBRARY_GA, seed=seed + k))
            save_factored_archive(
                compress(matrices, result.best.transform_params(), k), target
            )
            if progress:
                progress(f"wrote {target.name} (rmse {result.best_fitness.rmse:.5f})")
        factored_paths[k] = target

    descriptor = MaterialDescriptor(name, material_type, ranks[0], source=measured)
    return LibraryEntry(descriptor, measured, factored_paths)


def generate_material_library(
    root: str | Path,
    force: bool = False,
    progress: Callable[[str], None] | None = None,
) -> list[LibraryEntry]:
    """Build (or top up) the bundled suite under `root`; idempotent.

    Every archive is deterministic: synthesis, optimizer and compression
    all run from per-material fixed seeds.
    """
    root = Path(root)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailureError(f"cannot create material directory {root}: {exc}") from exc

    entries = []
    for name, pattern, seed in SUITE:
        entries.append(
            _build_variant(
                root, name, MaterialType.HETEROGENEOUS, pattern, seed,
                HETERO_RANKS, force, progress,
            )
        )
        entries.append(
            _build_variant(
                root, name, MaterialType.HOMOGENEOUS, Pattern.UNIFORM,
                seed + _HOMO_SEED_SHIFT, (1,), force, progress,
            )
        )

    dipole = root / "placeholder-wax.dipole.json"
    if force or not dipole.exists():
        dipole.write_text(json.dumps(PLACEHOLDER_DIPOLE, indent=2) + "\n", "utf-8")
        if progress:
            progress(f"wrote {dipole.name}")
    return entries


_FACTORED_SUFFIX = re.compile(r"^(?P<stem>.+)-k(?P<k>\d+)$")


def scan_material_dir(root: str | Path) -> tuple[list[LibraryEntry], list[MaterialDescriptor]]:
    """Inventory a materials directory.

    Returns measured entries (sorted by file name) and the analytic dipole
    materials found beside them. Factored archives pair with their measured
    archive through the `<stem>-k<K>.gpsf` naming convention.
    """
    root = Path(root)
    if not root.is_dir():
        raise IoFailureError(f"material directory {root} does not exist")

    factored_by_stem: dict[str, dict[int, Path]] = {}
    for path in sorted(root.glob("*.gpsf")):
        match = _FACTORED_SUFFIX.match(path.stem)
        if match:
            factored_by_stem.setdefault(match["stem"], {})[int(match["k"])] = path

    entries = []
    for path in sorted(root.glob("*.gpss")):
        descriptor, _, _ = load_material_archive(path)
        entries.append(LibraryEntry(descriptor, path, factored_by_stem.get(path.stem, {})))

    dipoles = [load_dipole_material(p) for p in sorted(root.glob("*.dipole.json"))]
    return entries, dipoles
