"""Generator sets ``phi_i = exp(2 pi i <l_i, .>) psi_i`` described on the frequency side.

Each ``psi_i`` is given through its Fourier transform: either the indicator of
the unit cube (the sinc generator) or a table of values ``psi_hat(w_j + l)``
on a cell-centred grid ``w_j`` of the fundamental domain and finitely many
integer offsets ``l``. Tables are read as piecewise constant on the grid cells.

Zak transforms on the frequency side follow

    Z_g(w, x) = sum_l g(w + l) exp(-2 pi i <l, x>).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .spectrum import Offset, TilingDecomposition, cell_center, cell_of, sup_norm


class MixedGridError(ValueError):
    pass


@dataclass(frozen=True)
class AnalyticIndicator:
    """``psi_hat`` = indicator of ``[-1/2, 1/2]^d``; its Zak transform is identically 1."""

    def fiber(self, omega, dim: int) -> tuple[tuple[Offset, ...], np.ndarray]:
        return ((0,) * dim,), np.ones(1, dtype=complex)


@dataclass(frozen=True, eq=False)
class RasterProfile:
    """Tabulated ``psi_hat``; ``values[n, c]`` is the value at offset ``offsets[n]``
    over cell ``c`` (row-major flat index into the ``grid^dim`` cells)."""

    dim: int
    grid: int
    offsets: tuple[Offset, ...]
    values: np.ndarray

    def __post_init__(self):
        offs = tuple(tuple(int(c) for c in o) for o in self.offsets)
        if any(len(o) != self.dim for o in offs):
            raise ValueError("offset dimension mismatch")
        if len(set(offs)) != len(offs):
            raise ValueError("duplicate offsets in profile")
        vals = np.array(self.values, dtype=complex).reshape(len(offs), self.grid ** self.dim)
        if not np.all(np.isfinite(vals)):
            raise ValueError("profile values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "offsets", offs)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_entries(cls, dim: int, grid: int, entries) -> "RasterProfile":
        """Build from ``(cell_index, offset, value)`` triples; missing values are 0."""
        table: dict[Offset, np.ndarray] = {}
        for idx, off, val in entries:
            off = tuple(int(c) for c in off)
            row = table.setdefault(off, np.zeros(grid ** dim, dtype=complex))
            row[np.ravel_multi_index(tuple(idx), (grid,) * dim)] += val
        offs = tuple(sorted(table))
        vals = np.array([table[o] for o in offs]).reshape(len(offs), grid ** dim)
        return cls(dim, grid, offs, vals)

    @property
    def r_max(self) -> int:
        return max((sup_norm(o) for o in self.offsets), default=0)

    def flat_cell(self, omega) -> int:
        return int(np.ravel_multi_index(cell_of(omega, self.grid), (self.grid,) * self.dim))

    def fiber(self, omega, dim: int | None = None) -> tuple[tuple[Offset, ...], np.ndarray]:
        return self.offsets, self.values[:, self.flat_cell(omega)]

    def scaled(self, factor: complex) -> "RasterProfile":
        return RasterProfile(self.dim, self.grid, self.offsets, self.values * factor)

    def same_as(self, other) -> bool:
        return (isinstance(other, RasterProfile) and self.grid == other.grid
                and self.offsets == other.offsets and np.array_equal(self.values, other.values))


FrequencyProfile = AnalyticIndicator | RasterProfile


def _same_profile(a: FrequencyProfile, b: FrequencyProfile) -> bool:
    if isinstance(a, AnalyticIndicator):
        return isinstance(b, AnalyticIndicator)
    return a.same_as(b)


def zak_profile(profile: FrequencyProfile, omega, x) -> complex:
    """``Z_{psi_hat}(omega, x)``; a finite sum over the stored offsets."""
    if isinstance(profile, AnalyticIndicator):
        return 1.0 + 0.0j
    return complex(zak_profile_many(profile, omega, np.atleast_2d(x))[0])


def zak_profile_many(profile: FrequencyProfile, omega, xs: np.ndarray) -> np.ndarray:
    """Vectorised over the rows of ``xs`` (shape ``(m, d)``)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if isinstance(profile, AnalyticIndicator):
        return np.ones(len(xs), dtype=complex)
    offs, vals = profile.fiber(omega)
    phases = np.exp(-2j * np.pi * xs @ np.asarray(offs, dtype=float).T)
    return phases @ vals


@dataclass(frozen=True)
class GeneratorSet:
    """``k`` generators given as ``(base frequency, profile)`` pairs.

    ``periodization_bounded`` records the (user-asserted) bounded quadratic
    periodization in time; no computation depends on it.
    """

    dim: int
    members: tuple[tuple[Offset, FrequencyProfile], ...]
    periodization_bounded: bool = True

    def __post_init__(self):
        members = []
        for base, prof in self.members:
            base = tuple(int(c) for c in base)
            if len(base) != self.dim:
                raise ValueError(f"base frequency {base} does not have dimension {self.dim}")
            if isinstance(prof, RasterProfile) and prof.dim != self.dim:
                raise ValueError("profile dimension mismatch")
            members.append((base, prof))
        if not members:
            raise ValueError("a generator set needs at least one member")
        for (b1, p1), (b2, p2) in itertools.combinations(members, 2):
            if b1 == b2 and _same_profile(p1, p2):
                raise ValueError(f"duplicate generator with base frequency {b1}")
        object.__setattr__(self, "members", tuple(members))

    @classmethod
    def indicators(cls, offsets: Sequence[Sequence[int]]) -> "GeneratorSet":
        """Sinc generators of the multi-tile ``union_i [-1/2,1/2]^d + l_i``."""
        offsets = [tuple(o) for o in offsets]
        return cls(len(offsets[0]), tuple((o, AnalyticIndicator()) for o in offsets))

    @classmethod
    def from_decomposition(cls, dec: TilingDecomposition) -> "GeneratorSet":
        """Indicator generators ``phi_hat_i = 1_{Omega_i}`` of a level-k multi-tile.

        ``Omega_i`` collects the cells of each class ``Q_n`` shifted by the
        i-th element of ``B_n``; base frequencies are all zero.
        """
        k = dec.level()
        if k is None:
            raise ValueError("decomposition is not a multi-tile: offset sets differ in size")
        covered = sum(len(q) for q in dec.cells)
        if covered != dec.grid ** dec.dim:
            raise ValueError("decomposition does not cover the fundamental domain")
        entries = [[] for _ in range(k)]
        for q, b in zip(dec.cells, dec.offset_sets):
            for idx in q:
                for i, off in enumerate(b):
                    entries[i].append((idx, off, 1.0))
        zero = (0,) * dec.dim
        return cls(dec.dim, tuple((zero, RasterProfile.from_entries(dec.dim, dec.grid, e))
                                  for e in entries))

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def bases(self) -> np.ndarray:
        return np.array([b for b, _ in self.members], dtype=float).reshape(self.k, self.dim)

    @property
    def profiles(self) -> list[FrequencyProfile]:
        return [p for _, p in self.members]

    @cached_property
    def grid(self) -> int | None:
        """Common profile grid, or None when every profile is an indicator."""
        grids = {p.grid for p in self.profiles if isinstance(p, RasterProfile)}
        if len(grids) > 1:
            raise MixedGridError(f"profiles live on different grids: {sorted(grids)}")
        return grids.pop() if grids else None

    @property
    def all_indicators(self) -> bool:
        return all(isinstance(p, AnalyticIndicator) for p in self.profiles)

    @cached_property
    def C(self) -> float:
        return constant_C(self)

    @cached_property
    def K(self) -> float:
        return constant_K(self)

    @cached_property
    def D(self) -> float:
        return constant_D(self)

    def fiber(self, omega) -> tuple[list[Offset], np.ndarray]:
        """Fiber ``phi_hat_i(omega + l)`` of every generator over a common offset list.

        Returns the offsets and a ``k x L`` matrix.
        """
        rows = []
        for base, prof in self.members:
            offs, vals = prof.fiber(omega, self.dim)
            rows.append({tuple(o + b for o, b in zip(off, base)): v for off, v in zip(offs, vals)})
        support = sorted({o for r in rows for o in r})
        mat = np.zeros((self.k, len(support)), dtype=complex)
        col = {o: n for n, o in enumerate(support)}
        for i, r in enumerate(rows):
            for o, v in r.items():
                mat[i, col[o]] = v
        return support, mat

    def zak_phi_hat(self, omega, xs: np.ndarray) -> np.ndarray:
        """``Z_{phi_hat_i}(omega, x_r)`` as a ``k x m`` matrix.

        Modulation by ``l_i`` shifts the fiber, which multiplies the Zak
        transform by ``exp(-2 pi i <x, l_i>)``.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if xs.shape[1] != self.dim:
            raise ValueError(f"points have dimension {xs.shape[1]}, generators {self.dim}")
        psi = np.array([zak_profile_many(p, omega, xs) for p in self.profiles])
        return np.exp(-2j * np.pi * self.bases @ xs.T) * psi

    def fiber_cells(self) -> list[np.ndarray]:
        """One representative frequency per cell of the common grid."""
        g = self.grid or 1
        return [cell_center(idx, g) for idx in itertools.product(range(g), repeat=self.dim)]


def _raster_profiles(gens: GeneratorSet) -> list[RasterProfile]:
    gens.grid  # raises on mixed grids
    return [p for p in gens.profiles if isinstance(p, RasterProfile)]


def constant_C(gens: GeneratorSet) -> float:
    """Largest periodization ``sum_l |psi_hat_i(w + l)|`` over members and grid cells."""
    best = 1.0 if any(isinstance(p, AnalyticIndicator) for p in gens.profiles) else 0.0
    for p in _raster_profiles(gens):
        if p.values.size:
            best = max(best, float(np.abs(p.values).sum(axis=0).max()))
    return best


def _probe_points(grid: int, dim: int) -> np.ndarray:
    return np.array([cell_center(idx, grid) for idx in itertools.product(range(grid), repeat=dim)])


def constant_K(gens: GeneratorSet) -> float:
    """Grid estimate of the Lipschitz constant of ``w -> Z_{psi_hat_i}(w, x)``.

    Difference quotients are taken between all pairs of cell centres, with
    ``x`` probed on the same grid. This can only under-estimate the true
    supremum.
    """
    rasters = _raster_profiles(gens)
    if not rasters:
        return 0.0
    grid = gens.grid
    if grid < 2:
        raise ValueError("degenerate grid: need at least 2 points per dimension to estimate K")
    omegas = _probe_points(grid, gens.dim)
    xs = omegas
    dist = np.max(np.abs(omegas[:, None, :] - omegas[None, :, :]), axis=-1)
    off_diag = ~np.eye(len(omegas), dtype=bool)
    best = 0.0
    for p in rasters:
        phases = np.exp(-2j * np.pi * xs @ np.asarray(p.offsets, dtype=float).T)  # (x, L)
        zak = (phases @ p.values).T  # (omega, x)
        for a in range(len(omegas)):
            diff = np.abs(zak[a][None, :] - zak).max(axis=1)
            mask = off_diag[a]
            best = max(best, float((diff[mask] / dist[a][mask]).max()))
    return best


def constant_D(gens: GeneratorSet) -> float:
    """Frequency-side estimate of ``sup_x sum_l |psi_i(x + l)|^2``.

    Uses ``sum_l |psi(x + l)|^2 = int |Z_{psi_hat}(w, -x)|^2 dw`` with the
    integral replaced by the cell average. Indicators give exactly 1.
    """
    best = 1.0 if any(isinstance(p, AnalyticIndicator) for p in gens.profiles) else 0.0
    for p in _raster_profiles(gens):
        xs = _probe_points(p.grid, gens.dim)
        phases = np.exp(2j * np.pi * xs @ np.asarray(p.offsets, dtype=float).T)
        zak = phases @ p.values
        best = max(best, float(np.mean(np.abs(zak) ** 2, axis=1).max()))
    return best


def orthonormality_check(gens: GeneratorSet, tol: float = 1e-10) -> tuple[bool, float]:
    """Check that the fibers ``{phi_hat_i(w + l)}_l`` are orthonormal at every grid cell.

    Returns ``(passed, max |G(w) - I|)``.
    """
    worst = 0.0
    eye = np.eye(gens.k)
    for omega in gens.fiber_cells():
        _, mat = gens.fiber(omega)
        gram = mat @ mat.conj().T
        worst = max(worst, float(np.abs(gram - eye).max()))
    return worst <= tol, worst


def random_orthonormal_generators(dim: int, grid: int, k: int, radius: int,
                                  rng: np.random.Generator) -> GeneratorSet:
    """Random generator set with orthonormal fibers (test and experiment fixture).

    Every cell gets ``k`` orthonormal vectors supported on the offsets in
    ``[-radius, radius]^dim``; base frequencies are distinct lattice points
    and the profiles are shifted back accordingly.
    """
    box = list(itertools.product(range(-radius, radius + 1), repeat=dim))
    if k > len(box):
        raise ValueError("not enough offsets for k orthonormal fibers")
    ncell = grid ** dim
    fibers = np.empty((ncell, k, len(box)), dtype=complex)
    for c in range(ncell):
        a = rng.standard_normal((len(box), k)) + 1j * rng.standard_normal((len(box), k))
        q, _ = np.linalg.qr(a)
        fibers[c] = q.T
    picks = rng.choice(len(box), size=k, replace=False)
    members = []
    for i in range(k):
        base = box[picks[i]]
        offs = tuple(tuple(o - b for o, b in zip(off, base)) for off in box)
        members.append((base, RasterProfile(dim, grid, offs, fibers[:, i, :].T)))
    return GeneratorSet(dim, tuple(members))


# -- JSON ---------------------------------------------------------------------

def generators_from_json(obj: dict) -> GeneratorSet:
    dim = int(obj["dim"])
    members = []
    for m in obj["members"]:
        prof = m["profile"]
        if prof == "indicator":
            p = AnalyticIndicator()
        else:
            entries = [(e["omega_index"], e["offset"], complex(e["re"], e.get("im", 0.0)))
                       for e in prof["entries"]]
            p = RasterProfile.from_entries(dim, int(prof["grid"]), entries)
        members.append((tuple(m["base_freq"]), p))
    return GeneratorSet(dim, tuple(members))


def generators_to_json(gens: GeneratorSet) -> dict:
    members = []
    for base, p in gens.members:
        if isinstance(p, AnalyticIndicator):
            prof = "indicator"
        else:
            shape = (p.grid,) * p.dim
            entries = []
            for n, off in enumerate(p.offsets):
                for c in np.flatnonzero(p.values[n]):
                    v = p.values[n, c]
                    entries.append({"omega_index": [int(i) for i in np.unravel_index(c, shape)],
                                    "offset": list(off), "re": float(v.real), "im": float(v.imag)})
            prof = {"grid": p.grid, "entries": entries}
        members.append({"base_freq": list(base), "profile": prof})
    return {"dim": gens.dim, "members": members}
