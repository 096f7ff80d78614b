"""Monte Carlo check of the sample-count guarantees at the formula's m.

For each configuration the failure rate over seeded trials is compared with
eps, together with a one-sided binomial p-value for "failure probability <= eps".
"""

import argparse

from zaksampling.experiments import TrialConfig, run_trials
from zaksampling.spectrum import MultiTileSpectrum, RasterSpectrum

CASES = {
    "cubes k=2 d=1": MultiTileSpectrum(1, ((0,), (3,))),
    "cubes k=4 d=1": MultiTileSpectrum(1, ((0,), (1,), (3,), (7,))),
    "cubes k=2 d=2": MultiTileSpectrum(2, ((0, 0), (1, 2))),
    "cubes k=4 d=2": MultiTileSpectrum(2, ((0, 0), (1, 0), (0, 3), (-2, 1))),
    # [-1/2, 1/2] together with [3/2, 2]
    "two-piece k=2 N=2": RasterSpectrum(1, 2, {(0,): [(0,), (2,)], (1,): [(0,)]}),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    print(f"{'case':20s} {'m':>6s} {'failures':>9s} {'rate':>6s} {'alpha_max':>9s} {'p':>6s}")
    for name, spec in CASES.items():
        cfg = TrialConfig(args.alpha, args.eps, args.trials, args.seed, spectrum=spec)
        s = run_trials(cfg, workers=args.threads)
        print(f"{name:20s} {s.m:6d} {s.failures:9d} {s.failure_rate:6.3f} {s.alpha_max:9.4f} "
              f"{s.binomial_pvalue(args.eps):6.3f}")


if __name__ == "__main__":
    main()
