"""Zak matrices, fiber Gramians and frame-bound certificates for periodic sampling.

For a pattern ``X + Z^d`` and generators ``Phi`` the sampling inequalities
with bounds ``A, B`` hold iff ``A <= eig(T(w)) <= B`` for a.e. fiber ``w``,
where ``T(w) = conj(Z) Z^t`` and ``Z`` is the ``k x m`` Zak matrix. This module
evaluates ``T`` on finite fiber sets and also hosts the closed-form
sample-count and tail bounds.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .generators import GeneratorSet, orthonormality_check
from .spectrum import BoundaryGeometry, TilingDecomposition, cover_scale

# beyond this many samples a count is reported but never simulated
SIMULABLE_LIMIT = 10**7


@dataclass(frozen=True, eq=False)
class SamplingPattern:
    """``m`` points of the fundamental cell; the sampling set is ``(X + Z^d) / scale``."""

    points: np.ndarray
    scale: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) < 1:
            raise ValueError("a sampling pattern needs at least one point")
        if np.any(np.abs(pts) > 0.5):
            raise ValueError("sample points must lie in [-1/2, 1/2]^d")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, m: int, dim: int, seed: int) -> "SamplingPattern":
        """``m`` i.i.d. uniform points, drawn from a counter-based generator keyed by ``seed``."""
        rng = np.random.Generator(np.random.Philox(key=seed))
        return cls(rng.uniform(-0.5, 0.5, size=(m, dim)), seed=seed)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_json(self) -> dict:
        out = {"dim": self.dim, "scale": self.scale, "points": self.points.tolist()}
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SamplingPattern":
        pts = np.asarray(obj["points"], dtype=float).reshape(-1, int(obj["dim"]))
        return cls(pts, float(obj.get("scale", 1.0)), obj.get("seed"))


@dataclass
class FrameReport:
    per_fiber: list[tuple[str, float, float]]
    global_min: float
    global_max: float
    m: int
    k: int
    alpha_target: float
    alpha_achieved: float
    passed: bool
    grid_spec: str
    rank_deficient: bool = False

    def to_json(self) -> dict:
        out = asdict(self)
        out["per_fiber"] = [{"omega": w, "lambda_min": lo, "lambda_max": hi}
                            for w, lo, hi in self.per_fiber]
        out["pass"] = out.pop("passed")
        return out


@dataclass(frozen=True)
class GridPolicy:
    """Which fibers ``verify_frame`` evaluates.

    ``net``: centres of a ``delta``-net sized from ``net_resolution`` with ``K``
    multiplied by ``inflation``. ``grid``: cell centres of a ``G^d`` grid.
    ``per-fingerprint``: one fiber per distinct fiber configuration, exact for
    tabulated (piecewise-constant) profiles.
    """

    kind: str = "per-fingerprint"
    grid: int | None = None
    inflation: float = 2.0

    def __post_init__(self):
        if self.kind not in ("net", "grid", "per-fingerprint"):
            raise ValueError(f"unknown grid policy {self.kind!r}")
        if self.kind == "grid" and not (self.grid and self.grid >= 1):
            raise ValueError("grid policy needs a positive grid size")

    @classmethod
    def parse(cls, text: str, inflation: float = 2.0) -> "GridPolicy":
        if text.startswith("grid:"):
            return cls("grid", int(text.split(":", 1)[1]), inflation)
        return cls(text, None, inflation)


def _check_pattern(gens: GeneratorSet, pattern: SamplingPattern):
    if pattern.dim != gens.dim:
        raise ValueError(f"pattern dimension {pattern.dim} != generator dimension {gens.dim}")


def zak_matrix(gens: GeneratorSet, pattern: SamplingPattern, omega) -> np.ndarray:
    """``k x m`` matrix of ``Z_{phi_i}(x_j, omega)``, computed on the frequency side.

    Uses ``Z_f(x, w) = exp(2 pi i <x, w>) Z_{f_hat}(w, -x)``.
    """
    _check_pattern(gens, pattern)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if omega.shape != (gens.dim,):
        raise ValueError("frequency has the wrong dimension")
    xs = pattern.points
    return np.exp(2j * np.pi * xs @ omega)[None, :] * gens.zak_phi_hat(omega, -xs)


def gram_T(gens: GeneratorSet, pattern: SamplingPattern, omega) -> np.ndarray:
    z = zak_matrix(gens, pattern, omega)
    t = z.conj() @ z.T
    return (t + t.conj().T) / 2


def multitile_fast_T(dec: TilingDecomposition, pattern: SamplingPattern, n: int) -> np.ndarray:
    """``T`` on class ``Q_n`` of a level-k multi-tile: ``sum_r exp(2 pi i <x_r, b_j - b_i>)``."""
    if dec.level() is None:
        raise ValueError("offset sets differ in size; complete the spectrum to a multi-tile first")
    if pattern.dim != dec.dim:
        raise ValueError("pattern and spectrum dimensions differ")
    b = np.asarray(dec.offset_sets[n], dtype=float)
    e = np.exp(2j * np.pi * pattern.points @ b.T)
    return e.conj().T @ e


def net_resolution(k: int, C: float, K: float, alpha: float, dim: int = 1) -> tuple[float, int]:
    """Net spacing ``delta`` and net size ``ceil(1/(2 delta))^d``.

    ``K = 0`` means ``T`` does not depend on the fiber, so one point suffices.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if C <= 0 or K < 0:
        raise ValueError("need C > 0 and K >= 0")
    if K == 0:
        return math.inf, 1
    delta = min(0.5, alpha / (4 * k * C * K))
    return delta, math.ceil(1 / (2 * delta)) ** dim


def net_cardinality_bound(k: int, C: float, K: float, alpha: float, dim: int = 1) -> float:
    return (2 * k * C * K / alpha + 1) ** dim


def _centres(n: int, dim: int) -> list[np.ndarray]:
    axis = -0.5 + (np.arange(n) + 0.5) / n
    return [np.array(p) for p in itertools.product(axis, repeat=dim)]


def _fiber_configurations(gens: GeneratorSet) -> list[np.ndarray]:
    """One representative cell centre per distinct tabulated fiber configuration."""
    if gens.all_indicators:
        return [np.zeros(gens.dim)]
    seen: dict[bytes, np.ndarray] = {}
    for omega in gens.fiber_cells():
        support, mat = gens.fiber(omega)
        key = repr(support).encode() + np.ascontiguousarray(mat).tobytes()
        seen.setdefault(key, omega)
    return list(seen.values())


def _fmt(omega) -> str:
    return "(" + ", ".join(f"{w:.6g}" for w in np.atleast_1d(omega)) + ")"


def _extremes(t: np.ndarray) -> tuple[float, float]:
    ev = np.linalg.eigvalsh(t)
    return float(ev[0]), float(ev[-1])


def verify_frame(gens: GeneratorSet | TilingDecomposition, pattern: SamplingPattern,
                 alpha: float, policy: GridPolicy | str = "per-fingerprint",
                 waive_orthonormality: bool = False, workers: int = 1) -> FrameReport:
    """Certify ``m(1-alpha) <= eig T(w) <= m(1+alpha)`` on the fibers chosen by ``policy``.

    A ``TilingDecomposition`` of a level-k multi-tile is verified exactly with
    one matrix per class.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if isinstance(policy, str):
        policy = GridPolicy.parse(policy)
    m = pattern.m

    if isinstance(gens, TilingDecomposition):
        dec = gens
        if policy.kind != "per-fingerprint":
            raise ValueError("a tiling decomposition is verified with the per-fingerprint policy")
        if dec.N == 0:
            raise ValueError("empty fiber set")
        k = dec.level()
        labels = [f"Q{n}" for n in range(dec.N)]
        jobs = [lambda n=n: multitile_fast_T(dec, pattern, n) for n in range(dec.N)]
        spec = f"per-fingerprint exact ({dec.N} configurations)"
    else:
        _check_pattern(gens, pattern)
        if not waive_orthonormality:
            ok, dev = orthonormality_check(gens)
            if not ok:
                raise ValueError(f"generator fibers are not orthonormal (deviation {dev:.3g})")
        k = gens.k
        if policy.kind == "per-fingerprint":
            omegas = _fiber_configurations(gens)
            spec = f"per-fingerprint exact ({len(omegas)} configurations)"
        elif policy.kind == "grid":
            omegas = _centres(policy.grid, gens.dim)
            spec = f"grid G={policy.grid} ({len(omegas)} fibers)"
        else:
            delta, count = net_resolution(k, gens.C, gens.K * policy.inflation, alpha, gens.dim)
            n = 1 if math.isinf(delta) else math.ceil(1 / (2 * delta))
            omegas = _centres(n, gens.dim) if n > 1 else [np.zeros(gens.dim)]
            spec = f"net delta={delta:.6g} K-inflation={policy.inflation} ({count} fibers)"
        if not omegas:
            raise ValueError("empty fiber set")
        labels = [_fmt(w) for w in omegas]
        jobs = [lambda w=w: gram_T(gens, pattern, w) for w in omegas]

    def run(job):
        return _extremes(job())

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            extremes = list(pool.map(run, jobs))
    else:
        extremes = [run(j) for j in jobs]

    rank_deficient = m < k
    per_fiber = []
    for lab, (lo, hi) in zip(labels, extremes):
        lo = 0.0 if rank_deficient else max(lo, 0.0)
        per_fiber.append((lab, lo, hi))
    gmin = min(lo for _, lo, _ in per_fiber)
    gmax = max(hi for _, _, hi in per_fiber)
    achieved = max(1 - gmin / m, gmax / m - 1)
    passed = (not rank_deficient) and gmin >= m * (1 - alpha) and gmax <= m * (1 + alpha)
    return FrameReport(per_fiber, gmin, gmax, m, k, alpha, achieved, passed, spec, rank_deficient)


# -- closed-form bounds ---------------------------------------------------------

@dataclass(frozen=True)
class TailBound:
    raw: float
    simplified: float


def _check_alpha_eps(alpha: float, eps: float):
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not eps > 0:
        raise ValueError("eps must be positive")


def bernstein_tail(k: int, m: int, C: float, alpha: float) -> TailBound:
    """One-sided matrix Bernstein tail for ``|eig(T) - m| >= m alpha / 2`` at one fiber.

    ``raw`` uses ``nu = m alpha / 2``, ``sigma^2 = m (k C^2 - 1)``,
    ``B = k C^2 + 1``; ``simplified`` is ``k exp(-alpha^2 m / (10 k C^2))``.
    """
    if k < 1 or m < 1 or not C > 0 or not 0 < alpha < 1:
        raise ValueError("need k, m >= 1, C > 0 and alpha in (0, 1)")
    nu = m * alpha / 2
    sigma2 = max(m * (k * C**2 - 1), 0.0)
    b = k * C**2 + 1
    raw = k * math.exp(-(nu**2 / 2) / (sigma2 + b * nu / 3))
    simplified = k * math.exp(-alpha**2 * m / (10 * k * C**2))
    return TailBound(raw, simplified)


def _ceil_count(value: float, log_arg: float) -> int:
    if log_arg <= 1:
        warnings.warn(f"log argument {log_arg:.6g} <= 1; sample count clamped to 1",
                      RuntimeWarning, stacklevel=3)
        return 1
    return max(1, math.ceil(value))


def sample_count_thm1(k: int, C: float, K: float, dim: int, alpha: float, eps: float) -> int:
    """``ceil(10 C^2 k / alpha^2 * log(2k/eps * (2kCK/alpha + 1)^d))``."""
    _check_alpha_eps(alpha, eps)
    if k < 1 or not C > 0 or K < 0 or dim < 1:
        raise ValueError("need k >= 1, C > 0, K >= 0, d >= 1")
    arg = 2 * k / eps * (2 * k * C * K / alpha + 1) ** dim
    return _ceil_count(10 * C**2 / alpha**2 * k * math.log(arg), arg)


def sample_count_cor2(k: int, alpha: float, eps: float) -> int:
    """Union of ``k`` unit cubes: ``ceil(10 k / alpha^2 * log(2k/eps))``."""
    return sample_count_thm1(k, 1.0, 0.0, 1, alpha, eps)


def sample_count_ktile(k: int, n_omega: int, alpha: float, eps: float) -> int:
    """``ceil(10 k / alpha^2 * log(2 N k / eps))`` for complexity index ``N``."""
    _check_alpha_eps(alpha, eps)
    if k < 1 or n_omega < 1:
        raise ValueError("need k >= 1 and N >= 1")
    arg = 2 * n_omega * k / eps
    return _ceil_count(10 / alpha**2 * k * math.log(arg), arg)


def sample_count_general(geom: BoundaryGeometry, alpha: float, eps: float) -> tuple[float, int]:
    """Cube scale ``rho`` and ``ceil(20/alpha^2 * V * log(4V/eps))`` with ``V = |Omega|/rho^d``."""
    _check_alpha_eps(alpha, eps)
    rho = cover_scale(geom)
    v = geom.volume / rho**geom.dim
    arg = 4 / eps * v
    m = _ceil_count(20 / alpha**2 * v * math.log(arg), arg)
    if m > SIMULABLE_LIMIT:
        warnings.warn(f"m = {m} is not simulable; formula value only", RuntimeWarning, stacklevel=2)
    return rho, m
