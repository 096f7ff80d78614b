"""Exact finite signal model used as a brute-force oracle for the Zak-domain criterion.

Frequencies are restricted to ``w_j + l`` with ``w_j`` the centres of a
``G^d`` grid on ``[-1/2, 1/2)^d`` and ``l`` integer. A signal is the finite sum

    f(x) = G^{-d} sum_j sum_l f_hat(w_j + l) exp(2 pi i <w_j + l, x>)

and its norm is ``||f||^2 = G^{-d} sum |f_hat|^2``. Integer translates are
taken over one period ``l' in {0, ..., G-1}^d``; with this normalization
``sum_{l'} |f(x + l')|^2`` integrates ``|Z_f(x, .)|^2`` exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .generators import GeneratorSet
from .spectrum import (MultiTileSpectrum, Offset, RasterSpectrum, cell_center,
                       complete_to_multitile, k_level, tiling_decomposition)
from .verify import SamplingPattern, gram_T, zak_matrix


class SingularFiberError(np.linalg.LinAlgError):
    def __init__(self, omega, cond):
        super().__init__(f"T(w) is singular or nearly so at w={np.round(omega, 6).tolist()} "
                         f"(condition number {cond:.3g})")
        self.omega = omega
        self.cond = cond


def frequency_grid(grid: int, dim: int) -> np.ndarray:
    """Cell centres ``w_j`` in row-major order, shape ``(G^d, d)``."""
    return np.array([cell_center(idx, grid) for idx in itertools.product(range(grid), repeat=dim)])


def lattice_period(grid: int, dim: int) -> np.ndarray:
    return np.array(list(itertools.product(range(grid), repeat=dim)), dtype=float).reshape(-1, dim)


@dataclass(frozen=True, eq=False)
class DiscreteSignal:
    """Coefficients ``f_hat(w_j + offsets[n])`` stored as ``coeffs[j, n]``; ``mask`` marks
    the active pairs of the spectrum."""

    dim: int
    grid: int
    offsets: tuple[Offset, ...]
    coeffs: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        shape = (self.grid ** self.dim, len(self.offsets))
        coeffs = np.array(self.coeffs, dtype=complex).reshape(shape)
        mask = np.array(self.mask, dtype=bool).reshape(shape)
        if np.any(coeffs[~mask] != 0):
            raise ValueError("coefficients outside the spectrum")
        coeffs.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "offsets", tuple(tuple(o) for o in self.offsets))
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "mask", mask)

    @property
    def omegas(self) -> np.ndarray:
        return frequency_grid(self.grid, self.dim)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2)) / self.grid ** self.dim

    def dense(self, offsets) -> np.ndarray:
        """Coefficients re-indexed on ``offsets`` (must contain every nonzero entry)."""
        offsets = [tuple(o) for o in offsets]
        col = {o: n for n, o in enumerate(offsets)}
        out = np.zeros((len(self.coeffs), len(offsets)), dtype=complex)
        for n, o in enumerate(self.offsets):
            if o in col:
                out[:, col[o]] = self.coeffs[:, n]
            elif np.any(self.coeffs[:, n] != 0):
                raise ValueError(f"offset {o} carries energy but is not in the target list")
        return out

    def scaled(self, factor: complex) -> "DiscreteSignal":
        return DiscreteSignal(self.dim, self.grid, self.offsets, self.coeffs * factor, self.mask)

    def to_json(self) -> dict:
        entries = []
        shape = (self.grid,) * self.dim
        for j, n in zip(*np.nonzero(self.mask)):
            v = self.coeffs[j, n]
            idx = [int(i) for i in np.unravel_index(j, shape)] + list(self.offsets[n])
            entries.append({"indices": idx, "re": float(v.real), "im": float(v.imag)})
        return {"dim": self.dim, "grid": self.grid, "entries": entries}

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteSignal":
        dim, grid = int(obj["dim"]), int(obj["grid"])
        offs = sorted({tuple(e["indices"][dim:]) for e in obj["entries"]})
        col = {o: n for n, o in enumerate(offs)}
        coeffs = np.zeros((grid ** dim, len(offs)), dtype=complex)
        mask = np.zeros(coeffs.shape, dtype=bool)
        for e in obj["entries"]:
            j = np.ravel_multi_index(tuple(e["indices"][:dim]), (grid,) * dim)
            n = col[tuple(e["indices"][dim:])]
            coeffs[j, n] = complex(e["re"], e["im"])
            mask[j, n] = True
        return cls(dim, grid, tuple(offs), coeffs, mask)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``values[r, p] = f(x_r + l'_p)`` with ``l'_p`` running over ``{0..G-1}^d`` row-major."""

    dim: int
    grid: int
    pattern: SamplingPattern
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.pattern.m, self.grid ** self.dim):
            raise ValueError(f"sample array has shape {vals.shape}, "
                             f"expected {(self.pattern.m, self.grid ** self.dim)}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def to_json(self) -> dict:
        shape = (self.grid,) * self.dim
        entries = [{"indices": [r] + [int(i) for i in np.unravel_index(p, shape)],
                    "re": float(v.real), "im": float(v.imag)}
                   for (r, p), v in np.ndenumerate(self.values)]
        return {"dim": self.dim, "grid": self.grid, "pattern": self.pattern.to_json(),
                "entries": entries}


def _active_mask(spectrum: MultiTileSpectrum | RasterSpectrum | None, grid: int,
                 dim: int) -> tuple[tuple[Offset, ...], np.ndarray]:
    if spectrum is None:
        return (), np.zeros((grid ** dim, 0), dtype=bool)
    if isinstance(spectrum, MultiTileSpectrum):
        if spectrum.scale != 1.0:
            raise ValueError("the finite model uses unit-scale spectra")
        offs = tuple(sorted(spectrum.offsets))
        return offs, np.ones((grid ** dim, len(offs)), dtype=bool)
    if grid % spectrum.grid:
        raise ValueError(f"signal grid {grid} is not a multiple of the raster grid {spectrum.grid}")
    offs = tuple(sorted({o for fp in spectrum.cells.values() for o in fp}))
    col = {o: n for n, o in enumerate(offs)}
    mask = np.zeros((grid ** dim, len(offs)), dtype=bool)
    ratio = grid // spectrum.grid
    for j, idx in enumerate(itertools.product(range(grid), repeat=dim)):
        for o in spectrum.fingerprint(tuple(i // ratio for i in idx)):
            mask[j, col[o]] = True
    return offs, mask


def synthesize_random(spectrum: MultiTileSpectrum | RasterSpectrum | None, grid: int,
                      seed: int, dim: int | None = None) -> DiscreteSignal:
    """Standard complex Gaussian coefficients (``E|f_hat|^2 = 1``) on every active pair."""
    dim = spectrum.dim if spectrum is not None else (dim or 1)
    offs, mask = _active_mask(spectrum, grid, dim)
    rng = np.random.Generator(np.random.Philox(key=seed))
    z = (rng.standard_normal(mask.shape) + 1j * rng.standard_normal(mask.shape)) / np.sqrt(2)
    return DiscreteSignal(dim, grid, offs, np.where(mask, z, 0), mask)


def fiber_basis(gens: GeneratorSet, omegas: np.ndarray) -> tuple[list[Offset], np.ndarray]:
    """Generator fibers at every ``w_j`` on one offset list; array shape ``(G^d, k, L)``."""
    fibers = [gens.fiber(w) for w in omegas]
    support = sorted({o for s, _ in fibers for o in s})
    col = {o: n for n, o in enumerate(support)}
    out = np.zeros((len(omegas), gens.k, len(support)), dtype=complex)
    for j, (s, mat) in enumerate(fibers):
        out[j][:, [col[o] for o in s]] = mat
    return support, out


def synthesize_in_span(gens: GeneratorSet, grid: int, seed: int) -> tuple[DiscreteSignal, np.ndarray]:
    """Random element of the span of ``gens``; returns the signal and its fiber
    coefficients ``c[j, i]`` in the generator basis."""
    omegas = frequency_grid(grid, gens.dim)
    support, basis = fiber_basis(gens, omegas)
    rng = np.random.Generator(np.random.Philox(key=seed))
    shape = (len(omegas), gens.k)
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    coeffs = np.einsum("ji,jil->jl", c, basis)
    mask = np.any(basis != 0, axis=1)
    return DiscreteSignal(gens.dim, grid, tuple(support), coeffs, mask), c


def evaluate(f: DiscreteSignal, x, shift) -> complex:
    """``f(x + l')`` by the defining double sum (``l'`` taken modulo ``G``)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    shift = np.mod(np.atleast_1d(np.asarray(shift, dtype=int)), f.grid)
    total = 0j
    for j, w in enumerate(f.omegas):
        for n, off in enumerate(f.offsets):
            c = f.coeffs[j, n]
            if c != 0:
                total += c * np.exp(2j * np.pi * np.dot(w + np.asarray(off), x + shift))
    return total / f.grid ** f.dim


def _period_phase(grid: int, dim: int) -> np.ndarray:
    # exp(2 pi i <w_0, l'>) with w_0 the first cell centre, reshaped for the FFT axes
    lat = lattice_period(grid, dim)
    return np.exp(2j * np.pi * lat @ np.full(dim, -0.5 + 0.5 / grid))


def take_samples(f: DiscreteSignal, pattern: SamplingPattern) -> SampleSet:
    """All values ``f(x_r + l')``; the sum over ``w_j`` is an inverse DFT."""
    if pattern.dim != f.dim:
        raise ValueError("pattern and signal dimensions differ")
    xs = pattern.points
    omegas = f.omegas
    offs = np.asarray(f.offsets, dtype=float).reshape(len(f.offsets), f.dim)
    # a[r, j] = sum_l f_hat(w_j + l) exp(2 pi i <w_j + l, x_r>)
    inner = np.exp(2j * np.pi * xs @ offs.T) @ f.coeffs.T if len(offs) else np.zeros((len(xs), len(omegas)))
    a = inner * np.exp(2j * np.pi * xs @ omegas.T)
    shape = (len(xs),) + (f.grid,) * f.dim
    axes = tuple(range(1, f.dim + 1))
    vals = np.fft.ifftn(a.reshape(shape), axes=axes).reshape(len(xs), -1)
    return SampleSet(f.dim, f.grid, pattern, vals * _period_phase(f.grid, f.dim)[None, :])


def zak_of_samples(s: SampleSet) -> np.ndarray:
    """``y[r, j] = sum_{l'} s[r, l'] exp(-2 pi i <l', w_j>)``, i.e. ``Z_f(x_r, w_j)``."""
    shape = (s.pattern.m,) + (s.grid,) * s.dim
    axes = tuple(range(1, s.dim + 1))
    v = s.values * _period_phase(s.grid, s.dim).conj()[None, :]
    return np.fft.fftn(v.reshape(shape), axes=axes).reshape(s.pattern.m, -1)


def fiber_coefficients(f: DiscreteSignal, gens: GeneratorSet) -> np.ndarray:
    """``c[j, i] = <f_hat fiber at w_j, phi_hat_i fiber>`` (generator fibers orthonormal)."""
    support, basis = fiber_basis(gens, f.omegas)
    extra = set(f.offsets) - set(support)
    dense = f.dense(support + sorted(extra))[:, : len(support)]
    return np.einsum("jil,jl->ji", basis.conj(), dense)


def reconstruct(s: SampleSet, gens: GeneratorSet, pattern: SamplingPattern | None = None,
                cond_limit: float = 1e12) -> DiscreteSignal:
    """Per-fiber least squares ``Z^t c = y`` solved through ``T c = conj(Z) y``."""
    pattern = pattern or s.pattern
    y = zak_of_samples(s)
    omegas = frequency_grid(s.grid, s.dim)
    support, basis = fiber_basis(gens, omegas)
    c = np.zeros((len(omegas), gens.k), dtype=complex)
    for j, w in enumerate(omegas):
        z = zak_matrix(gens, pattern, w)
        t = z.conj() @ z.T
        cond = np.linalg.cond(t)
        if not np.isfinite(cond) or cond > cond_limit:
            raise SingularFiberError(w, cond)
        c[j] = np.linalg.solve(t, z.conj() @ y[:, j])
    coeffs = np.einsum("ji,jil->jl", c, basis)
    mask = np.any(basis != 0, axis=1)
    return DiscreteSignal(s.dim, s.grid, tuple(support), coeffs, mask)


def relative_error(f: DiscreteSignal, g: DiscreteSignal) -> float:
    offs = sorted(set(f.offsets) | set(g.offsets))
    a, b = f.dense(offs), g.dense(offs)
    ref = np.linalg.norm(a)
    return float(np.linalg.norm(a - b) / ref) if ref else float(np.linalg.norm(b))


def energy_identity_check(f: DiscreteSignal, gens: GeneratorSet,
                          pattern: SamplingPattern) -> tuple[float, float, float]:
    """Direct sample energy versus ``G^{-d} sum_j <T(w_j) c_j, c_j>``.

    Returns ``(lhs, rhs, |lhs - rhs| / lhs)``.
    """
    lhs = take_samples(f, pattern).energy()
    c = fiber_coefficients(f, gens)
    rhs = 0.0
    for j, w in enumerate(f.omegas):
        t = gram_T(gens, pattern, w)
        rhs += float(np.real(c[j].conj() @ t @ c[j]))
    rhs /= f.grid ** f.dim
    gap = abs(lhs - rhs) / lhs if lhs > 0 else 0.0
    return lhs, rhs, gap


def generators_for_spectrum(spectrum: MultiTileSpectrum | RasterSpectrum) -> GeneratorSet:
    """Orthonormal generators whose span contains ``PW_spectrum``.

    Multi-tiles get sinc generators; rasters are completed to a multi-tile at
    their own level first.
    """
    if isinstance(spectrum, MultiTileSpectrum):
        return GeneratorSet.indicators(spectrum.offsets)
    k = k_level(spectrum)
    if k == 0:
        raise ValueError("empty spectrum has no generators")
    return GeneratorSet.from_decomposition(tiling_decomposition(complete_to_multitile(spectrum, k)))
