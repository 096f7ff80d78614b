"""Spectra on the integer lattice: multi-tiles, rasters and their tiling structure.

A compact spectrum is stored through its *fingerprint*: for every cell of a
uniform ``G^d`` partition of the fundamental domain ``[-1/2, 1/2)^d`` we keep
the set of integer offsets ``l`` such that ``cell + l`` lies in the spectrum.
Everything that would be an "almost everywhere" statement in the continuum
becomes an exact statement about cells.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

Offset = tuple[int, ...]
Fingerprint = tuple[Offset, ...]
CellIndex = tuple[int, ...]


def _offset(coords: Iterable[int], dim: int) -> Offset:
    out = tuple(int(c) for c in coords)
    if len(out) != dim:
        raise ValueError(f"lattice point {out} does not have dimension {dim}")
    return out


def sup_norm(offset: Sequence[int]) -> int:
    return max((abs(c) for c in offset), default=0)


def completion_order(offset: Offset) -> tuple:
    """Sort key used when offsets are added during completion.

    Smaller sup-norm first; ties go to the lexicographically larger offset,
    so in one dimension the order is 0, 1, -1, 2, -2, ...
    """
    return (sup_norm(offset), tuple(-c for c in offset))


def _canonical(offsets: Iterable[Sequence[int]], dim: int) -> Fingerprint:
    return tuple(sorted({_offset(o, dim) for o in offsets}))


@dataclass(frozen=True)
class MultiTileSpectrum:
    """Union of cubes ``[-scale/2, scale/2]^d + scale * l_i`` with distinct ``l_i``."""

    dim: int
    offsets: tuple[Offset, ...]
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        offs = tuple(_offset(o, self.dim) for o in self.offsets)
        if not offs:
            raise ValueError("a multi-tile spectrum needs at least one offset")
        if len(set(offs)) != len(offs):
            raise ValueError("multi-tile offsets must be pairwise distinct")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "offsets", offs)

    @property
    def k(self) -> int:
        return len(self.offsets)

    def to_raster(self, grid: int = 1) -> "RasterSpectrum":
        """Raster form (unit scale only): every cell carries all offsets."""
        if self.scale != 1.0:
            raise ValueError("only unit-scale multi-tiles live on the integer lattice")
        fp = _canonical(self.offsets, self.dim)
        cells = {idx: fp for idx in itertools.product(range(grid), repeat=self.dim)}
        return RasterSpectrum(self.dim, grid, cells)


@dataclass(frozen=True)
class RasterSpectrum:
    """Spectrum given cell by cell on a ``grid^dim`` partition of the fundamental domain."""

    dim: int
    grid: int
    cells: Mapping[CellIndex, Fingerprint] = field(default_factory=dict)
    r_max: int | None = None

    def __post_init__(self):
        if self.dim < 1 or self.grid < 1:
            raise ValueError("dimension and grid must be >= 1")
        canon: dict[CellIndex, Fingerprint] = {}
        for idx, offs in self.cells.items():
            idx = _offset(idx, self.dim)
            if any(not 0 <= i < self.grid for i in idx):
                raise ValueError(f"cell index {idx} outside 0..{self.grid - 1}")
            fp = _canonical(offs, self.dim)
            if fp:
                canon[idx] = tuple(sorted(set(canon.get(idx, ())) | set(fp)))
        bound = max((sup_norm(o) for fp in canon.values() for o in fp), default=0)
        if self.r_max is None:
            object.__setattr__(self, "r_max", bound)
        elif bound > self.r_max:
            raise ValueError(f"offset with sup-norm {bound} exceeds r_max={self.r_max}")
        object.__setattr__(self, "cells", dict(sorted(canon.items())))

    @classmethod
    def from_indicator(cls, dim: int, grid: int, contains: Callable[[np.ndarray], bool],
                       r_max: int) -> "RasterSpectrum":
        """Rasterize a set given by a membership test, probing cell centres."""
        cells = {}
        box = range(-r_max, r_max + 1)
        for idx in itertools.product(range(grid), repeat=dim):
            centre = cell_center(idx, grid)
            cells[idx] = [l for l in itertools.product(box, repeat=dim)
                          if contains(centre + np.asarray(l, dtype=float))]
        return cls(dim, grid, cells, r_max=r_max)

    def all_cells(self) -> Iterable[CellIndex]:
        return itertools.product(range(self.grid), repeat=self.dim)

    def fingerprint(self, idx: CellIndex) -> Fingerprint:
        return self.cells.get(tuple(idx), ())

    @property
    def cell_volume(self) -> float:
        return self.grid ** (-self.dim)

    @property
    def volume(self) -> float:
        return self.cell_volume * sum(len(fp) for fp in self.cells.values())


@dataclass(frozen=True)
class TilingDecomposition:
    """``Omega = union_n Q_n + B_n`` with the ``Q_n`` disjoint groups of cells."""

    dim: int
    grid: int
    cells: tuple[frozenset[CellIndex], ...]
    offset_sets: tuple[Fingerprint, ...]

    @property
    def N(self) -> int:
        return len(self.offset_sets)

    def reassemble(self) -> dict[CellIndex, Fingerprint]:
        out = {}
        for q, b in zip(self.cells, self.offset_sets):
            for idx in q:
                if idx in out:
                    raise ValueError(f"cell {idx} appears in two classes")
                out[idx] = b
        return dict(sorted(out.items()))

    def level(self) -> int | None:
        """Common cardinality of the ``B_n`` or None if they differ."""
        sizes = {len(b) for b in self.offset_sets}
        return sizes.pop() if len(sizes) == 1 else None

    def representative(self, n: int) -> np.ndarray:
        return cell_center(min(self.cells[n]), self.grid)


@dataclass(frozen=True)
class BoundaryGeometry:
    volume: float
    surface: float
    kappa: float
    dim: int

    def __post_init__(self):
        for name in ("volume", "surface", "kappa"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")


def cell_center(idx: Sequence[int], grid: int) -> np.ndarray:
    return -0.5 + (np.asarray(idx, dtype=float) + 0.5) / grid


def cell_of(omega: Sequence[float], grid: int) -> CellIndex:
    """Index of the half-open cell containing ``omega``; ``+1/2`` folds into the last cell."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w < -0.5) or np.any(w > 0.5):
        raise ValueError(f"frequency {w} outside the fundamental domain")
    idx = np.floor((w + 0.5) * grid).astype(int)
    return tuple(int(i) for i in np.minimum(idx, grid - 1))


def fingerprints(raster: RasterSpectrum) -> dict[CellIndex, Fingerprint]:
    """Fingerprint of every cell of the fundamental domain (empty ones included)."""
    return {idx: raster.fingerprint(idx) for idx in raster.all_cells()}


def tiling_decomposition(raster: RasterSpectrum) -> TilingDecomposition:
    """Minimal decomposition: level sets of the fingerprint map.

    Cells with equal fingerprints share a class and different fingerprints
    cannot, so the number of classes is the tiling complexity index.
    """
    groups: dict[Fingerprint, set[CellIndex]] = {}
    for idx, fp in raster.cells.items():
        groups.setdefault(fp, set()).add(idx)
    order = sorted(groups, key=lambda fp: min(groups[fp]))
    return TilingDecomposition(raster.dim, raster.grid,
                               tuple(frozenset(groups[fp]) for fp in order),
                               tuple(order))


def k_level(raster: RasterSpectrum) -> int:
    return max((len(fp) for fp in raster.cells.values()), default=0)


def offsets_union(raster: RasterSpectrum) -> set[Offset]:
    return {o for fp in raster.cells.values() for o in fp}


def _smallest_missing(present: Iterable[Offset], count: int, dim: int) -> list[Offset]:
    present = set(present)
    added: list[Offset] = []
    radius = 0
    while len(added) < count:
        shell = [o for o in itertools.product(range(-radius, radius + 1), repeat=dim)
                 if sup_norm(o) == radius and o not in present]
        shell.sort(key=completion_order)
        added.extend(shell[: count - len(added)])
        radius += 1
    return added


def complete_to_multitile(raster: RasterSpectrum, k: int) -> RasterSpectrum:
    """Enlarge ``raster`` to a multi-tile of level exactly ``k`` over the whole domain.

    Offsets are added class by class (one class per distinct fingerprint, plus
    one for the empty cells), so the complexity index grows by at most one.
    """
    if k < k_level(raster):
        raise ValueError(f"level below current maximum: {k} < {k_level(raster)}")
    if k < 1:
        raise ValueError("level must be >= 1")
    filled: dict[Fingerprint, Fingerprint] = {}
    cells = {}
    for idx in raster.all_cells():
        fp = raster.fingerprint(idx)
        if fp not in filled:
            extra = _smallest_missing(fp, k - len(fp), raster.dim)
            filled[fp] = tuple(sorted(fp + tuple(extra)))
        cells[idx] = filled[fp]
    r_max = max(raster.r_max or 0, max(sup_norm(o) for fp in filled.values() for o in fp))
    return RasterSpectrum(raster.dim, raster.grid, cells, r_max=r_max)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def cover_constant(d: int) -> float:
    """``2 beta_d (1 + sqrt(d-1))^2 11^d`` from the boundary covering estimate."""
    return 2.0 * unit_ball_volume(d) * (1.0 + math.sqrt(d - 1)) ** 2 * 11.0 ** d


def cover_scale(geom: BoundaryGeometry) -> float:
    return geom.kappa / cover_constant(geom.dim) * geom.volume / geom.surface


def rho_and_cover(geom: BoundaryGeometry, raster: RasterSpectrum,
                  tol: float = 1e-9) -> tuple[float, MultiTileSpectrum]:
    """Cube side ``rho`` and the smallest union of ``rho``-lattice cubes covering ``raster``.

    A cube counts as meeting a raster box only if the overlap has positive
    volume (up to ``tol`` in units of ``rho``).
    """
    if geom.dim != raster.dim:
        raise ValueError("geometry and raster dimensions differ")
    rho = cover_scale(geom)
    width = 1.0 / raster.grid
    chosen: set[Offset] = set()
    for idx, fp in raster.cells.items():
        lo_cell = -0.5 + np.asarray(idx) * width
        for off in fp:
            lo = lo_cell + np.asarray(off)
            hi = lo + width
            first = np.floor(lo / rho - 0.5 + tol).astype(int) + 1
            last = np.ceil(hi / rho + 0.5 - tol).astype(int) - 1
            ranges = [range(a, b + 1) for a, b in zip(first, last)]
            chosen.update(itertools.product(*ranges))
    if not chosen:
        raise ValueError("cannot cover an empty spectrum")
    cover = MultiTileSpectrum(raster.dim, tuple(sorted(chosen)), scale=rho)
    bound = 2.0 * geom.volume / rho ** geom.dim
    if cover.k > bound:
        warnings.warn(f"cover uses {cover.k} cubes, more than 2|Omega|/rho^d = {bound:.6g}; "
                      "raster too coarse for this rho", RuntimeWarning, stacklevel=2)
    return rho, cover


# -- JSON ---------------------------------------------------------------------

def spectrum_from_json(obj: dict) -> MultiTileSpectrum | RasterSpectrum:
    kind = obj.get("type")
    dim = int(obj["dim"])
    if kind == "multitile":
        return MultiTileSpectrum(dim, tuple(tuple(o) for o in obj["offsets"]),
                                 float(obj.get("scale", 1.0)))
    if kind == "raster":
        cells = {}
        for c in obj.get("cells", []):
            idx = tuple(c["index"])
            cells[idx] = list(cells.get(idx, [])) + [tuple(o) for o in c["offsets"]]
        return RasterSpectrum(dim, int(obj["grid"]), cells)
    raise ValueError(f"unknown spectrum type {kind!r}")


def spectrum_to_json(spec: MultiTileSpectrum | RasterSpectrum) -> dict:
    if isinstance(spec, MultiTileSpectrum):
        return {"dim": spec.dim, "type": "multitile", "scale": spec.scale,
                "offsets": [list(o) for o in spec.offsets]}
    return {"dim": spec.dim, "type": "raster", "grid": spec.grid,
            "cells": [{"index": list(idx), "offsets": [list(o) for o in fp]}
                      for idx, fp in spec.cells.items()]}


def as_raster(spec: MultiTileSpectrum | RasterSpectrum, grid: int = 1) -> RasterSpectrum:
    return spec.to_raster(grid) if isinstance(spec, MultiTileSpectrum) else spec
