"""Command line entry point.

Exit codes: 0 success, 1 invalid input or operational error, 2 the
computation ran but the frame certificate (or Monte Carlo check) failed.
Machine-readable output goes to stdout, everything else to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import schemas
from .experiments import TrialConfig, run_trials, sweep_m, to_csv
from .generators import generators_from_json
from .signal import (SingularFiberError, generators_for_spectrum, reconstruct, relative_error,
                     synthesize_random, take_samples)
from .spectrum import (BoundaryGeometry, MultiTileSpectrum, as_raster, complete_to_multitile,
                       k_level, offsets_union, spectrum_from_json, spectrum_to_json,
                       tiling_decomposition)
from .verify import (SIMULABLE_LIMIT, GridPolicy, SamplingPattern, sample_count_general,
                     sample_count_ktile, sample_count_thm1, verify_frame)

EXIT_OK, EXIT_INVALID, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load(path: str, schema, what: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not valid JSON: {exc}") from None
    schemas.validate(obj, schema, what)
    return obj


def _note(fmt: str, *args) -> None:
    print(fmt % args, file=sys.stderr)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


# -- subcommands ----------------------------------------------------------------

def cmd_spectrum(args) -> int:
    spec = spectrum_from_json(_load(args.file, schemas.SPECTRUM, "spectrum"))
    raster = as_raster(spec)
    if args.action == "analyze":
        dec = tiling_decomposition(raster)
        _emit({"N": dec.N, "k": k_level(raster),
               "L": [list(o) for o in sorted(offsets_union(raster))]})
        return EXIT_OK
    if args.level is None:
        raise UsageError("spectrum complete needs --level")
    done = spectrum_to_json(complete_to_multitile(raster, args.level))
    if args.out:
        Path(args.out).write_text(json.dumps(done, indent=2) + "\n")
        _note("wrote completed spectrum to %s", args.out)
    else:
        _emit(done)
    return EXIT_OK


def cmd_bounds(args) -> int:
    kind = args.kind
    need = {"thm1": ["k", "alpha", "eps"], "cor2": ["k", "alpha", "eps"],
            "ktile": ["k", "N", "alpha", "eps"],
            "general": ["volume", "surface", "kappa", "d", "alpha", "eps"]}[kind]
    missing = [n for n in need if getattr(args, n) is None]
    if missing:
        raise UsageError(f"bounds {kind} needs --{', --'.join(missing)}")
    out: dict = {}
    if kind == "thm1":
        inputs = {"k": args.k, "C": args.C, "K": args.K, "d": args.d or 1,
                  "alpha": args.alpha, "eps": args.eps}
        out["m"] = sample_count_thm1(args.k, args.C, args.K, args.d or 1, args.alpha, args.eps)
        formula = "ceil(10 C^2/alpha^2 k log(2k/eps (2kCK/alpha + 1)^d))"
    elif kind == "cor2":
        inputs = {"k": args.k, "alpha": args.alpha, "eps": args.eps}
        out["m"] = sample_count_thm1(args.k, 1.0, 0.0, 1, args.alpha, args.eps)
        formula = "ceil(10/alpha^2 k log(2k/eps))"
    elif kind == "ktile":
        inputs = {"k": args.k, "N": args.N, "alpha": args.alpha, "eps": args.eps}
        out["m"] = sample_count_ktile(args.k, args.N, args.alpha, args.eps)
        formula = "ceil(10/alpha^2 k log(2 N k/eps))"
    else:
        geom = BoundaryGeometry(args.volume, args.surface, args.kappa, args.d)
        inputs = {"volume": args.volume, "surface": args.surface, "kappa": args.kappa,
                  "d": args.d, "alpha": args.alpha, "eps": args.eps}
        rho, m = sample_count_general(geom, args.alpha, args.eps)
        out.update(m=m, rho=rho, simulable=m <= SIMULABLE_LIMIT)
        formula = "ceil(20/alpha^2 V log(4V/eps)), V = |Omega|/rho^d"
    out.update(inputs=inputs, formula=formula)
    _emit(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    pattern = SamplingPattern.from_json(_load(args.pattern, schemas.PATTERN, "pattern"))
    if bool(args.generators) == bool(args.spectrum):
        raise UsageError("verify needs exactly one of --generators or --spectrum")
    policy = GridPolicy.parse(args.policy, args.inflation)
    if args.generators:
        system = generators_from_json(_load(args.generators, schemas.GENERATORS, "generators"))
    else:
        spec = spectrum_from_json(_load(args.spectrum, schemas.SPECTRUM, "spectrum"))
        if isinstance(spec, MultiTileSpectrum):
            system = generators_for_spectrum(spec)
        else:
            system = tiling_decomposition(complete_to_multitile(spec, k_level(spec)))
    rep = verify_frame(system, pattern, args.alpha, policy,
                       waive_orthonormality=args.waive_orthonormality, workers=args.threads)
    _emit(rep.to_json())
    _note("verification %s: alpha_achieved=%.6g", "PASS" if rep.passed else "FAIL",
          rep.alpha_achieved)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _signal_setup(args):
    spec = spectrum_from_json(_load(args.spectrum, schemas.SPECTRUM, "spectrum"))
    if args.pattern:
        pattern = SamplingPattern.from_json(_load(args.pattern, schemas.PATTERN, "pattern"))
    elif args.m:
        pattern = SamplingPattern.uniform(args.m, spec.dim, args.seed)
    else:
        raise UsageError("give --pattern or --m")
    _note("seed: %d", args.seed)
    f = synthesize_random(spec, args.grid, args.seed)
    return spec, pattern, f


def cmd_simulate(args) -> int:
    spec, pattern, f = _signal_setup(args)
    samples = take_samples(f, pattern)
    norm2 = f.norm2()
    energy = samples.energy()
    _emit({"m": pattern.m, "grid": args.grid, "seed": args.seed, "signal_norm2": norm2,
           "sample_energy": energy,
           "normalized_energy": energy / (pattern.m * norm2) if norm2 else None,
           "max_abs_sample": float(abs(samples.values).max())})
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    spec, pattern, f = _signal_setup(args)
    gens = generators_for_spectrum(spec)
    try:
        rec = reconstruct(take_samples(f, pattern), gens, pattern)
    except SingularFiberError as exc:
        _note("%s", exc)
        return EXIT_FAIL
    _emit({"m": pattern.m, "grid": args.grid, "seed": args.seed,
           "relative_error": relative_error(f, rec)})
    return EXIT_OK


def cmd_experiment(args) -> int:
    obj = _load(args.config, schemas.EXPERIMENT, "experiment config")
    if args.seed is not None:
        obj["base_seed"] = args.seed
    cfg = TrialConfig.from_json(obj)
    _note("base seed: %d", cfg.base_seed)
    if args.action == "run":
        rows = [run_trials(cfg, workers=args.threads)]
        ok = rows[0].failure_rate <= cfg.eps
    else:
        if "m_values" not in obj:
            raise UsageError("experiment sweep needs m_values in the config")
        rows = sweep_m(cfg, obj["m_values"], workers=args.threads)
        ok = True
    text = to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
        _note("wrote %d rows to %s", len(rows), args.out)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zaksampling", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker cap for fiber/trial parallelism")
    p.add_argument("--seed", type=int, default=None, help="global seed override")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", help="tiling analysis of a spectrum")
    s.add_argument("action", choices=["analyze", "complete"])
    s.add_argument("file")
    s.add_argument("--level", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    b = sub.add_parser("bounds", help="sample-count formulas")
    b.add_argument("kind", choices=["thm1", "cor2", "ktile", "general"])
    b.add_argument("--k", type=int)
    b.add_argument("--C", type=float, default=1.0)
    b.add_argument("--K", type=float, default=0.0)
    b.add_argument("--d", type=int)
    b.add_argument("--N", type=int)
    b.add_argument("--alpha", type=float)
    b.add_argument("--eps", type=float)
    b.add_argument("--volume", type=float)
    b.add_argument("--surface", type=float)
    b.add_argument("--kappa", type=float)
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify", help="certify frame bounds of a sampling pattern")
    v.add_argument("--generators")
    v.add_argument("--spectrum")
    v.add_argument("--pattern", required=True)
    v.add_argument("--alpha", type=float, required=True)
    v.add_argument("--policy", default="per-fingerprint")
    v.add_argument("--inflation", type=float, default=2.0, help="K multiplier for the net policy")
    v.add_argument("--waive-orthonormality", action="store_true")
    v.set_defaults(func=cmd_verify)

    for name, func in (("simulate", cmd_simulate), ("reconstruct", cmd_reconstruct)):
        c = sub.add_parser(name, help=f"{name} on the finite signal model")
        c.add_argument("--spectrum", required=True)
        c.add_argument("--pattern")
        c.add_argument("--m", type=int, help="draw a uniform pattern of this size instead")
        c.add_argument("--grid", type=int, required=True)
        c.add_argument("--seed", type=int, dest="local_seed", default=None)
        c.set_defaults(func=func)

    e = sub.add_parser("experiment", help="Monte Carlo trials")
    e.add_argument("action", choices=["run", "sweep"])
    e.add_argument("--config", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        local = getattr(args, "local_seed", None)
        if args.command in ("simulate", "reconstruct"):
            args.seed = local if local is not None else (args.seed if args.seed is not None else 0)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
