"""Command-line interface: ``hsplus <subcommand> [options]``.

Exit codes: 0 success, 1 failed check or runtime error, 2 usage error.

Options can also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment); keys are the long option names of the subcommand
with dashes or underscores. Command-line flags override the file.
"""

import argparse
import csv
import logging
import math
import os
import secrets
import sys

import numpy as np

from . import _backend
from ._io import fmt, read_csv, write_csv
from .exceptions import HsPlusError, PoleAtOrigin
from .priors import PriorSpec, kappa_prior_density, lambda_density, marginal_theta_density

DEFAULT_SEED = 20150401

log = logging.getLogger("hsplus")


class UsageError(Exception):
    pass


def _csv_floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _seed(text):
    if str(text).strip().lower() == "random":
        return "random"
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _grid(text):
    try:
        lo, hi, step = (float(v) for v in str(text).split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be LO:HI:STEP") from None
    if not (step > 0 and hi >= lo):
        raise argparse.ArgumentTypeError("grid needs STEP > 0 and HI >= LO")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file supplying default options")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: logical cores)")
    common.add_argument("--seed", type=_seed, default=None,
                        help=f"master seed, integer or 'random' (default {DEFAULT_SEED})")
    common.add_argument("--backend", choices=("auto", "cython", "numpy"), default=None,
                        help="kernel backend (default auto)")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    p = argparse.ArgumentParser(prog="hsplus", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    d = sub.add_parser("density", parents=[common], help="prior density curve as CSV x,density")
    d.add_argument("--family", choices=("hs", "hs+"))
    d.add_argument("--tau", type=float)
    d.add_argument("--grid", type=_grid, help="LO:HI:STEP")
    d.add_argument("--scale", choices=("theta", "lambda", "kappa"))
    d.add_argument("--output", help="output CSV (default stdout)")

    f = sub.add_parser("fit", parents=[common], help="Gibbs sampler on a CSV column y")
    f.add_argument("--input", help="CSV with a 'y' column")
    f.add_argument("--family", choices=("hs", "hs+"))
    f.add_argument("--tau-policy", help="fixed:R | half-cauchy:S | uniform (default half-cauchy:1/n)")
    f.add_argument("--iters", type=_positive_int)
    f.add_argument("--burn", type=int)
    f.add_argument("--chains", type=_positive_int)
    f.add_argument("--output", help="output prefix (default 'fit')")

    t = sub.add_parser("test", parents=[common], help="half-threshold decisions from a fit summary")
    t.add_argument("--summary", help="summary CSV written by 'fit'")
    t.add_argument("--output", help="decisions CSV (default stdout)")

    s = sub.add_parser("sim-sse", parents=[common], help="sparse-means SSE experiment")
    s.add_argument("--n", type=_positive_int)
    s.add_argument("--q", type=_csv_floats, help="comma-separated signal fractions")
    s.add_argument("--A", dest="A", type=_csv_floats, help="comma-separated signal magnitudes")
    s.add_argument("--replicates", type=_positive_int)
    s.add_argument("--full", action="store_true", default=None, help="100 replicates")
    s.add_argument("--methods", help="comma-separated family/policy, e.g. hs+/half-cauchy:0.005")
    s.add_argument("--iters", type=_positive_int)
    s.add_argument("--burn", type=int)
    s.add_argument("--output", help="output CSV (default stdout)")

    m = sub.add_parser("sim-mp", parents=[common], help="two-groups misclassification experiment")
    m.add_argument("--n", type=_positive_int)
    m.add_argument("--mu", type=_csv_floats, help="comma-separated signal fractions")
    m.add_argument("--psi", type=float)
    m.add_argument("--replicates", type=_positive_int)
    m.add_argument("--mode", choices=("plugin", "full-bayes"))
    m.add_argument("--iters", type=_positive_int)
    m.add_argument("--burn", type=int)
    m.add_argument("--output", help="output CSV (default stdout)")

    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("--suite", choices=("bounds", "concentration", "tweedie", "mass", "mse", "all"))

    i = sub.add_parser("ingest", parents=[common], help="t-statistics to z-scores")
    i.add_argument("--tstats", help="CSV with id,stat[,df]")
    i.add_argument("--df", type=float, help="degrees of freedom for every row")
    i.add_argument("--output", help="z-score CSV (default stdout)")
    i.add_argument("--analyze", choices=("hs", "hs+"), help="also fit and write an effect-size report")
    i.add_argument("--report", help="effect-size report CSV (default report.csv)")
    i.add_argument("--iters", type=_positive_int)
    i.add_argument("--burn", type=int)
    return p, sub


DEFAULTS = {
    "threads": None, "seed": DEFAULT_SEED, "backend": "auto", "verbose": False,
    "family": "hs+", "tau": 1.0, "scale": "theta", "iters": None, "burn": None, "chains": 1,
    "n": 200, "replicates": None, "full": False, "mode": "plugin",
}


def _read_config(path):
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for k, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{k}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _apply_config(subparser, args, config):
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(config) - set(actions))
    if unknown:
        raise UsageError(f"unknown config keys {unknown}; valid keys: {sorted(actions)}")
    for key, text in config.items():
        if getattr(args, key, None) is not None:
            continue  # flag wins
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = text.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                value = action.type(text)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key}: {exc}") from None
        else:
            value = text
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key}: {value!r} not in {list(action.choices)}")
        setattr(args, key, value)


def _fill_defaults(args):
    for k, v in DEFAULTS.items():
        if getattr(args, k, None) is None and hasattr(args, k):
            setattr(args, k, v)
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    if args.seed == "random":
        args.seed = secrets.randbits(64)
        print(f"seed={args.seed}", file=sys.stderr)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _backend_name(args):
    return None if args.backend == "auto" else args.backend


def _emit(path, header, rows):
    if path:
        write_csv(path, header, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


# ---------------------------------------------------------------------------


def cmd_density(args):
    _require(args, "grid")
    spec = PriorSpec(args.family, args.tau)
    rows = []
    skipped = 0
    for x in args.grid:
        try:
            if args.scale == "theta":
                val = marginal_theta_density(spec, x)
            elif args.scale == "lambda":
                val = lambda_density(spec, x)
            else:
                val = kappa_prior_density(spec, x)
        except (PoleAtOrigin, HsPlusError) as exc:
            skipped += 1
            log.warning("x=%g skipped: %s", x, exc)
            continue
        rows.append((float(x), float(val)))
    if skipped:
        print(f"skipped {skipped} grid point(s) outside the support", file=sys.stderr)
    _emit(args.output, ["x", "density"], rows)
    return 0


def _read_column(path, name):
    header, rows = read_csv(path)
    low = [h.lower() for h in header]
    if name not in low:
        raise UsageError(f"{path}: no '{name}' column (header {header})")
    j = low.index(name)
    return np.array([float(r[j]) for r in rows]), header, rows


def cmd_fit(args):
    from .mcmc import McmcConfig, TauPolicy, run_gibbs, write_samples_csv, write_summary_csv
    _require(args, "input")
    y, _, _ = _read_column(args.input, "y")
    n = y.size
    policy = TauPolicy.parse(args.tau_policy) if args.tau_policy else TauPolicy.half_cauchy(1.0 / n)
    iters = args.iters or 10_000
    burn = args.burn if args.burn is not None else iters // 2
    cfg = McmcConfig(iterations=iters, burn_in=burn, seed=args.seed, tau_policy=policy,
                     chains=args.chains, keep_kappa=False)
    res = run_gibbs(y, args.family, cfg, threads=args.threads, backend=_backend_name(args))
    prefix = args.output or "fit"
    write_samples_csv(f"{prefix}_posterior.csv", res)
    write_summary_csv(f"{prefix}_summary.csv", res.summary, y)
    print(f"wrote {prefix}_posterior.csv and {prefix}_summary.csv "
          f"(tau mean {res.summary.tau_mean:.6g}, clamps {res.clamps})", file=sys.stderr)
    return 0


def cmd_test(args):
    from .multitest import half_threshold_rule
    _require(args, "summary")
    omega, header, rows = _read_column(args.summary, "omega_hat")
    low = [h.lower() for h in header]
    y = np.array([float(r[low.index("y")]) for r in rows]) if "y" in low else np.full(omega.size, np.nan)
    reject = half_threshold_rule(omega)
    _emit(args.output, ["index", "y", "omega_hat", "reject", "truth"],
          [(i + 1, y[i], omega[i], bool(reject[i]), "") for i in range(omega.size)])
    return 0


def cmd_sim_sse(args):
    from .experiments import SseConfig, SseMethod, run_sse_experiment
    from .mcmc import McmcConfig
    qs = args.q or (0.05, 0.1, 0.2)
    As = args.A or (7.0, 8.0)
    reps = args.replicates or (100 if args.full else 20)
    iters = args.iters or 10_000
    burn = args.burn if args.burn is not None else iters // 2
    scale = 1.0 / args.n
    methods = ([SseMethod.parse(x) for x in args.methods.split(",")] if args.methods else
               [SseMethod("hs+", f"half-cauchy:{scale!r}"), SseMethod("hs", f"half-cauchy:{scale!r}")])
    rows = []
    for q in qs:
        for a in As:
            cfg = SseConfig(n=args.n, q=q, A=a, replicates=reps,
                            mcmc=McmcConfig(iterations=iters, burn_in=burn, seed=args.seed))
            part = run_sse_experiment(cfg, methods, args.seed, threads=args.threads)
            for r in part:
                if r["dropped"]:
                    print(f"{r['method']} q={q:g} A={a:g}: dropped {r['dropped']} replicate(s)",
                          file=sys.stderr)
            rows.extend(part)
    _emit(args.output, ["method", "q", "A", "avg_sse", "mc_se", "replicates"],
          [(r["method"], r["q"], r["A"], r["avg_sse"], r["mc_se"], r["replicates"]) for r in rows])
    return 0


def cmd_sim_mp(args):
    from .experiments import MpConfig, run_mp_experiment
    from .mcmc import McmcConfig, TauPolicy
    iters = args.iters or 10_000
    burn = args.burn if args.burn is not None else iters // 2
    cfg = MpConfig(n=args.n, mu_grid=args.mu or (0.05, 0.1, 0.2), psi=args.psi,
                   replicates=args.replicates or 200, mode=args.mode,
                   mcmc=McmcConfig(iterations=iters, burn_in=burn, seed=args.seed,
                                   tau_policy=TauPolicy.half_cauchy(1.0)))
    rows = run_mp_experiment(cfg, args.seed, threads=args.threads)
    _emit(args.output, ["mu", "method", "mp", "mc_se"],
          [(r["mu"], r["method"], r["mp"], r["mc_se"]) for r in rows])
    return 0


def cmd_verify(args):
    from .verification import run_suite
    checks = run_suite(args.suite or "all")
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed} passed, {failed} failed")
    return 1 if failed else 0


def cmd_ingest(args):
    from .ingest import analyze, read_test_statistics, t_to_z, write_report
    from .mcmc import McmcConfig, TauPolicy
    _require(args, "tstats")
    stats = read_test_statistics(args.tstats, df=args.df)
    for lineno, rid, why in stats.rejected:
        print(f"rejected line {lineno} ({rid}): {why}", file=sys.stderr)
    z = t_to_z(stats)
    _emit(args.output, ["id", "y"], list(zip(stats.ids, z)))
    if args.analyze:
        iters = args.iters or 15_000
        burn = args.burn if args.burn is not None else 3_000
        cfg = McmcConfig(iterations=iters, burn_in=burn, seed=args.seed,
                         tau_policy=TauPolicy.half_cauchy(1.0 / max(1, z.size)))
        rep = analyze(z, args.analyze, cfg, ids=stats.ids, threads=args.threads)
        path = args.report or "report.csv"
        side = write_report(path, rep)
        print(f"wrote {path} and {side} (mse {rep.mse:.6g})", file=sys.stderr)
    return 0


COMMANDS = {
    "density": cmd_density,
    "fit": cmd_fit,
    "test": cmd_test,
    "sim-sse": cmd_sim_sse,
    "sim-mp": cmd_sim_mp,
    "verify": cmd_verify,
    "ingest": cmd_ingest,
}


def dispatch(argv=None):
    parser, sub = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.config:
            _apply_config(sub.choices[args.command], args, _read_config(args.config))
        _fill_defaults(args)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        log.debug("kernel backend: %s", _backend.active())
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hsplus {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (HsPlusError, ValueError, OSError) as exc:
        print(f"hsplus {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
