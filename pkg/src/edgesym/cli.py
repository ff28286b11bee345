"""Command-line front end: ``edgesym test|sample|simulate|shift``.

Exit codes: 0 success, 2 malformed input, 3 computation error.
Defaults for ``--seed`` and ``--workers`` can be overridden with the
``EDGESYM_SEED`` and ``EDGESYM_WORKERS`` environment variables.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import efficiency
from .densities import parse_family
from .errors import GrammarError, SymmetryError, ZeroShift
from .montecarlo import DEFAULT_SEED, load_spec, parse_model, run, stream, table1_spec, table2_spec
from .statistics import run_test

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3

TEST_ALIASES = {
    "s1": "S1",
    "m3": "S1",
    "s2": "S2_b1",
    "b1": "S2_b1",
    "tf1": "T_f1",
    "that": "T_hat_f1",
    "tcirc": "T_circ_f1",
    "tdagger": "T_dagger",
    "tlaplace": "T_laplace",
    "tlogistic": "T_logistic",
    "vdw": "VdW",
}

VERSUS = ("s1", "tdagger", "laplace", "logistic")


class InputError(Exception):
    pass


def _env_int(name, default):
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise InputError(f"{name}={value!r} is not an integer") from None


def read_sample(path):
    """Read one numeric value per line; blank lines are ignored."""
    values = []
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        field = line.strip()
        if not field:
            continue
        if "," in field:
            raise InputError(f"{path}:{lineno}: expected one column, got {field!r}")
        try:
            v = float(field)
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {field!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: non-finite value {field!r}")
        values.append(v)
    if not values:
        raise InputError(f"{path}: no observations")
    return np.array(values)


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _resolve_tests(spec):
    ids = []
    for name in spec.split(","):
        key = name.strip()
        if not key:
            continue
        test_id = TEST_ALIASES.get(key.lower(), key)
        if test_id not in TEST_ALIASES.values():
            raise InputError(f"unknown test {key!r}; choose from {', '.join(TEST_ALIASES)}")
        ids.append(test_id)
    if not ids:
        raise InputError("no tests selected")
    return ids


def cmd_test(args):
    x = read_sample(args.input)
    f1 = parse_family(args.f1) if args.f1 else None
    outcomes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for test_id in _resolve_tests(args.tests):
            if test_id in ("S1", "VdW") and args.theta is None:
                raise InputError(f"{test_id} needs --theta")
            out = run_test(test_id, x, theta=args.theta, f1=f1, location=args.location)
            row = out.to_dict()
            row["p_value"] = out.p_one_sided if args.sided == "one" else out.p_two_sided
            row["sided"] = args.sided
            outcomes.append(row)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(json.dumps(outcomes, indent=2), args.out)


def cmd_sample(args):
    if args.n < 1:
        raise InputError("--n must be positive")
    model = parse_model(args.model)
    x = model.rvs(args.n, stream(args.seed, 0, 0))
    _emit("".join("%.17g\n" % v for v in x), args.out)


def cmd_simulate(args):
    if args.spec:
        try:
            spec = load_spec(args.spec)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"invalid spec file {args.spec}: {exc}") from None
        changes = {"master_seed": args.seed}
        if args.N is not None:
            changes["N"] = args.N
        if args.n is not None:
            changes["n"] = args.n
        spec = spec.with_(**changes)
    else:
        build = table1_spec if args.table == 1 else table2_spec
        spec = build(N=args.N or 2000, n=args.n or 100, seed=args.seed)
    report = run(spec, workers=args.workers)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(report.to_csv())
    Path(f"{prefix}.json").write_text(report.to_json() + "\n")
    flagged = [c for c in report.cells if c.flagged]
    for c in flagged:
        print(f"warning: {c.scenario}/{c.test} skipped {c.skipped} replications",
              file=sys.stderr)
    print(f"wrote {prefix}.csv and {prefix}.json ({len(report.cells)} cells, "
          f"{report.wall_time:.1f}s)", file=sys.stderr)


def _versus_shift(name, g1, tau):
    if name == "s1":
        return efficiency.shift_s1(g1, tau)
    if name in ("tdagger", "b1"):
        return efficiency.optimal_shift("gaussian", g1, tau)
    if name == "laplace":
        return efficiency.optimal_shift("laplace", g1, tau)
    if name == "logistic":
        return efficiency.shift_t_circ("logistic", g1, tau)
    if name.startswith("tcirc:"):
        return efficiency.optimal_shift(name.split(":", 1)[1], g1, tau)
    raise InputError(f"unknown comparison test {name!r}; choose from {', '.join(VERSUS)}"
                     " or tcirc:<family>")


def cmd_shift(args):
    f1 = parse_family(args.f1)
    g1 = parse_family(args.g1)
    names = [v.strip() for v in args.versus.split(",") if v.strip()] if args.versus else []
    for name in names:
        if name not in VERSUS + ("b1",) and not name.startswith("tcirc:"):
            raise InputError(f"unknown comparison test {name!r}")
    base = efficiency.optimal_shift(f1, g1, args.tau)
    result = {"f1": str(f1), "g1": str(g1), "tau": args.tau, "shift": base,
              "are_vs": {}}
    if f1 == g1:
        result["shift_t_f1"] = efficiency.shift_t_f1(f1, args.tau)
    for name in names:
        other = _versus_shift(name, g1, args.tau)
        try:
            ratio = efficiency.are(base, other)
        except ZeroShift:
            ratio = None
        result["are_vs"][name] = {"shift": other, "are": ratio}
    _emit(json.dumps(result, indent=2), args.out)


def build_parser():
    seed = _env_int("EDGESYM_SEED", DEFAULT_SEED)
    workers = _env_int("EDGESYM_WORKERS", 1)
    p = argparse.ArgumentParser(prog="edgesym", description="Tests of symmetry against "
                                "Edgeworth-type skewed alternatives.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run symmetry tests on a one-column data file")
    t.add_argument("input", help="file with one number per line ('-' for stdin)")
    t.add_argument("--tests", default="b1,tdagger,tlaplace,tlogistic",
                   help="comma-separated: " + ", ".join(TEST_ALIASES))
    t.add_argument("--theta", type=float, default=None, help="specified center")
    t.add_argument("--f1", default=None, help="reference density for tf1/that/tcirc")
    t.add_argument("--location", choices=("median", "mean"), default=None,
                   help="center estimator when --theta is absent")
    t.add_argument("--sided", choices=("one", "two"), default="two")
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("sample", help="draw a sample from a model")
    s.add_argument("model", help="e.g. gaussian-edgeworth:xi=0.1, skewnormal:3, skewt:4:2")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("simulate", help="rejection frequencies over a scenario grid")
    grid = m.add_mutually_exclusive_group(required=True)
    grid.add_argument("--table", type=int, choices=(1, 2))
    grid.add_argument("--spec", help="JSON spec file")
    m.add_argument("--N", type=int, default=None, help="replications (default 2000)")
    m.add_argument("--n", type=int, default=None, help="sample size (default 100)")
    m.add_argument("--seed", type=int, default=seed)
    m.add_argument("--workers", type=int, default=workers)
    m.add_argument("--out", default="simulation", help="output path prefix")
    m.set_defaults(func=cmd_simulate)

    h = sub.add_parser("shift", help="asymptotic shifts and relative efficiencies")
    h.add_argument("--f1", required=True)
    h.add_argument("--g1", required=True)
    h.add_argument("--tau", type=float, default=1.0)
    h.add_argument("--versus", default="", help="comma-separated: " + ", ".join(VERSUS))
    h.add_argument("--out", default=None)
    h.set_defaults(func=cmd_shift)
    return p


def main(argv=None):
    try:
        parser = build_parser()
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        args.func(args)
    except (InputError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SymmetryError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
