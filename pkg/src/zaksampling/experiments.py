"""Seeded Monte Carlo trials of random periodic sampling patterns.

Trial ``t`` draws its pattern from a Philox generator keyed by
``base_seed + t``, so trials are independent tasks and the merged statistics
do not depend on how many workers ran them.
"""

from __future__ import annotations

import csv
import io
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .generators import GeneratorSet, generators_from_json, orthonormality_check
from .spectrum import (MultiTileSpectrum, RasterSpectrum, complete_to_multitile, k_level,
                       spectrum_from_json, tiling_decomposition)
from .verify import (GridPolicy, SamplingPattern, sample_count_cor2, sample_count_ktile,
                     sample_count_thm1, verify_frame)

CSV_HEADER = ["m", "trials", "failures", "failure_rate", "alpha_min", "alpha_median",
              "alpha_max", "seed"]


@dataclass
class TrialConfig:
    alpha: float
    eps: float
    trials: int
    base_seed: int = 0
    m: int | str = "auto"
    spectrum: MultiTileSpectrum | RasterSpectrum | None = None
    generators: GeneratorSet | None = None
    policy: str = "per-fingerprint"
    inflation: float = 2.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 < self.alpha < 1 or not 0 < self.eps < 1:
            raise ValueError("alpha and eps must lie in (0, 1)")
        if (self.spectrum is None) == (self.generators is None):
            raise ValueError("give exactly one of spectrum or generators")
        if self.m != "auto" and int(self.m) < 1:
            raise ValueError("m must be >= 1 or 'auto'")

    @property
    def dim(self) -> int:
        return (self.spectrum or self.generators).dim

    @classmethod
    def from_json(cls, obj: dict) -> "TrialConfig":
        spec = spectrum_from_json(obj["spectrum"]) if "spectrum" in obj else None
        gens = generators_from_json(obj["generators"]) if "generators" in obj else None
        return cls(alpha=float(obj["alpha"]), eps=float(obj["eps"]), trials=int(obj["trials"]),
                   base_seed=int(obj.get("base_seed", 0)), m=obj.get("m", "auto"),
                   spectrum=spec, generators=gens,
                   policy=obj.get("policy", "per-fingerprint"),
                   inflation=float(obj.get("inflation", 2.0)))


@dataclass
class TrialStats:
    m: int
    trials: int
    failures: int
    alpha_min: float
    alpha_median: float
    alpha_max: float
    base_seed: int = 0
    seeds: list[int] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials

    def binomial_pvalue(self, eps: float) -> float:
        """P(at least this many failures | failure probability eps)."""
        return float(stats.binom.sf(self.failures - 1, self.trials, eps))

    def csv_row(self) -> list:
        return [self.m, self.trials, self.failures, self.failure_rate, self.alpha_min,
                self.alpha_median, self.alpha_max, self.base_seed]


@dataclass(frozen=True)
class _Target:
    system: GeneratorSet | object
    policy: GridPolicy
    auto_m: int


def _resolve(cfg: TrialConfig) -> _Target:
    """Object handed to ``verify_frame`` plus the matching sample count."""
    if isinstance(cfg.spectrum, MultiTileSpectrum):
        gens = GeneratorSet.indicators(cfg.spectrum.offsets)
        return _Target(gens, GridPolicy.parse(cfg.policy, cfg.inflation),
                       sample_count_cor2(gens.k, cfg.alpha, cfg.eps))
    if isinstance(cfg.spectrum, RasterSpectrum):
        k = k_level(cfg.spectrum)
        if k == 0:
            raise ValueError("empty spectrum: k = 0")
        n_in = tiling_decomposition(cfg.spectrum).N
        dec = tiling_decomposition(complete_to_multitile(cfg.spectrum, k))
        # the union bound runs over the classes actually verified
        n_omega = max(n_in, dec.N)
        return _Target(dec, GridPolicy("per-fingerprint"),
                       sample_count_ktile(k, n_omega, cfg.alpha, cfg.eps))
    gens = cfg.generators
    policy = GridPolicy.parse(cfg.policy, cfg.inflation)
    m = sample_count_thm1(gens.k, gens.C, gens.K * cfg.inflation, gens.dim, cfg.alpha, cfg.eps)
    return _Target(gens, policy, m)


def resolve_m(cfg: TrialConfig) -> int:
    return _resolve(cfg).auto_m if cfg.m == "auto" else int(cfg.m)


def _one_trial(target: _Target, m: int, dim: int, alpha: float, seed: int) -> tuple[bool, float]:
    pattern = SamplingPattern.uniform(m, dim, seed)
    rep = verify_frame(target.system, pattern, alpha, target.policy, waive_orthonormality=True)
    return rep.passed, rep.alpha_achieved


def run_trials(cfg: TrialConfig, m: int | None = None, workers: int = 1) -> TrialStats:
    target = _resolve(cfg)
    if m is None:
        m = target.auto_m if cfg.m == "auto" else int(cfg.m)
    if isinstance(target.system, GeneratorSet):
        # checked once here; individual trials skip it
        ok, dev = orthonormality_check(target.system)
        if not ok:
            raise ValueError(f"generator fibers are not orthonormal (deviation {dev:.3g})")
    seeds = [cfg.base_seed + t for t in range(1, cfg.trials + 1)]

    def job(seed):
        return _one_trial(target, m, cfg.dim, cfg.alpha, seed)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, seeds))
    else:
        results = [job(s) for s in seeds]
    alphas = np.array([a for _, a in results])
    failures = sum(not ok for ok, _ in results)
    return TrialStats(m, cfg.trials, failures, float(alphas.min()), float(np.median(alphas)),
                      float(alphas.max()), cfg.base_seed, seeds, alphas.tolist())


def sweep_m(cfg: TrialConfig, m_values: Sequence[int], workers: int = 1) -> list[TrialStats]:
    if not len(m_values):
        raise ValueError("empty list of m values")
    unique = sorted(set(int(m) for m in m_values))
    if len(unique) < len(m_values):
        warnings.warn("duplicate m values removed", RuntimeWarning, stacklevel=2)
    return [run_trials(cfg, m, workers) for m in unique]


def ktile_experiment(raster: RasterSpectrum, alpha: float, eps: float, trials: int,
                     base_seed: int = 0, workers: int = 1) -> TrialStats:
    cfg = TrialConfig(alpha, eps, trials, base_seed, spectrum=raster)
    return run_trials(cfg, workers=workers)


def to_csv(rows: Sequence[TrialStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()
