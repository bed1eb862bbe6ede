"""Command-line entry point.

Exit codes: 0 success or nothing found, 1 the probe found something
(a WMON violation or a ratio certificate), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import instance_io as iio
from .core import (
    ClusteredInstance,
    ConfigurationError,
    ConstantsProfile,
    ContractViolation,
    CostMatrix,
    approx_ratio,
    makespan,
    optimal_makespan,
    optimal_makespan_clustered,
    expand_clustered,
)
from .corpus import random_clustered, random_matrix
from .lowerbound import certify_lower_bound, estimate_bad_fraction, make_standard_instance
from .mechanisms import MECHANISM_IDS, UnsupportedMechanism, build_mechanism, mechanism_config
from .slicelab import GridUndecided, SliceSpec, classify_2x2, shape_classify
from .wmon import GENERATORS, GRID, WmonReport, wmon_check_pair, wmon_scan

EXIT_OK, EXIT_FOUND, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    config: dict
    seeds: list
    outcome: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    wall_time: float = 0.0


def both(x) -> str:
    """``p/q (decimal)`` for human output."""
    x = Fraction(x)
    return f"{x} ({float(x):.9g})"


def _consts(args, n: int) -> ConstantsProfile:
    if args.consts:
        c = iio.consts_from_json(iio.load(args.consts))
        if c.n != n:
            raise UsageError(f"constants file is for n={c.n}, not n={n}")
        return c
    return ConstantsProfile.build(n)


def _mechanism(args, instance_obj: dict | None = None):
    config = None
    if getattr(args, "mech_config", None):
        config = iio.load(args.mech_config)
    mech_id = args.mech
    if mech_id is None and instance_obj and "mechanism" in instance_obj:
        mech_id = instance_obj["mechanism"]["id"]
        config = instance_obj["mechanism"].get("config")
    if mech_id is None:
        raise UsageError("no mechanism given (use --mech or a 'mechanism' block in the instance)")
    return build_mechanism(mech_id, config)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> tuple[RunReport, int]:
    rng = random.Random(args.seed)
    out = Path(args.out or "instances")
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport("generate", {}, [args.seed])
    for k in range(args.count):
        if args.kind == "standard":
            c = _consts(args, args.n)
            size = rng.randint(1, args.n - 1)
            chosen = set(rng.sample(range(1, args.n), size))
            obj = iio.clustered_to_json(make_standard_instance(args.n, c, chosen))
        elif args.kind == "clustered":
            obj = iio.clustered_to_json(random_clustered(rng, args.n, args.ell))
        else:
            obj = iio.matrix_to_json(random_matrix(rng, args.n, args.m))
        path = out / f"{args.kind}_{k:04d}.json"
        iio.dump(obj, path)
        report.artifacts.append(str(path))
    report.outcome = {"written": args.count}
    return report, EXIT_OK


def cmd_evaluate(args) -> tuple[RunReport, int]:
    obj = iio.load(args.instance)
    inst = iio.instance_from_json(obj)
    mech = _mechanism(args, obj)
    if isinstance(inst, ClusteredInstance):
        matrix = expand_clustered(inst)
        opt = optimal_makespan_clustered(inst)[0]
    else:
        matrix = inst
        opt = optimal_makespan(inst)[0]
    alloc = mech(matrix)
    mv = makespan(matrix, alloc)
    ratio = approx_ratio(matrix, alloc, opt)
    report = RunReport("evaluate", {"instance": args.instance}, [])
    report.outcome = {
        "mechanism": mech.name,
        "allocation": list(alloc.assignment),
        "mech": str(mv),
        "opt": str(opt),
        "ratio": str(ratio),
        "ratio_decimal": float(ratio),
    }
    print(f"allocation: {list(alloc.assignment)}", file=sys.stderr)
    print(f"Mech = {both(mv)}  Opt = {both(opt)}  ratio = {both(ratio)}", file=sys.stderr)
    return report, EXIT_OK


def _instance_scan(mech, matrix: CostMatrix, trials: int, seed: int, generator: str) -> WmonReport:
    """Random unilateral deviations around one fixed instance."""
    rng = random.Random(seed)
    rep = WmonReport(mech.name, f"{generator}@instance", seed, trials, seeds=[seed])
    for _ in range(trials):
        i = rng.randrange(matrix.n)
        row = list(matrix.values[i])
        if generator == "single":
            row[rng.randrange(matrix.m)] = rng.choice(GRID)
        else:
            row = [rng.choice(GRID) for _ in row]
        v = wmon_check_pair(mech, matrix, i, row)
        if v is not None:
            rep.violations += 1
            rep.first = rep.first or v
    return rep


def cmd_wmon(args) -> tuple[RunReport, int]:
    mech = _mechanism(args)
    if args.instance:
        inst = iio.instance_from_json(iio.load(args.instance))
        matrix = expand_clustered(inst) if isinstance(inst, ClusteredInstance) else inst
        rep = _instance_scan(mech, matrix, args.trials, args.seed, args.generator)
    else:
        rep = wmon_scan(mech, args.generator, args.trials, args.seed, workers=args.workers)
    report = RunReport("wmon-check", {"mechanism": mechanism_config(mech)}, rep.seeds)
    report.outcome = rep.to_json()
    print(rep.summary(), file=sys.stderr)
    if not rep.passed and args.out:
        iio.dump(rep.first.to_json(), args.out)
        report.artifacts.append(args.out)
    return report, EXIT_OK if rep.passed else EXIT_FOUND


def cmd_classify(args) -> tuple[RunReport, int]:
    mech = _mechanism(args)
    spec = None
    s_vals = (Fraction(1), Fraction(1))
    if args.instance:
        inst = iio.instance_from_json(iio.load(args.instance))
        if not isinstance(inst, ClusteredInstance):
            raise UsageError("slices are taken from clustered instances")
        if args.p is None or args.pprime is None:
            raise UsageError("--p and --pprime are required with --instance")
        spec = SliceSpec(inst, args.p, args.pprime)
        s_vals = (inst.values_of(args.p).s, inst.values_of(args.pprime).s)
    res = classify_2x2(mech, spec, args.budget, Fraction(args.tol), seed=args.seed)
    try:
        shape = shape_classify(mech, spec, s_vals, args.grid).to_json()
    except GridUndecided as exc:
        shape = {"kind": "undecided", "message": str(exc)}
    report = RunReport("classify-slice", {"mechanism": mechanism_config(mech), "p": args.p, "pprime": args.pprime}, [args.seed])
    report.outcome = dict(res.to_json(), shape=shape)
    print(f"{mech.name}: {res.cls} ({res.probes} probes), shape {shape['kind']}", file=sys.stderr)
    if args.out:
        iio.dump(report.outcome, args.out)
        report.artifacts.append(args.out)
    return report, EXIT_OK


def cmd_certify(args) -> tuple[RunReport, int]:
    mech = _mechanism(args)
    consts = _consts(args, args.n)
    res = certify_lower_bound(mech, args.n, consts, args.seed)
    report = RunReport("certify", {"mechanism": mechanism_config(mech), "n": args.n, "consts": iio.consts_to_json(consts)}, [args.seed])
    report.outcome = {"branch": res.branch, "log": res.log}
    if res.certificate is None:
        print("no certificate found", file=sys.stderr)
        return report, EXIT_OK
    cert = res.certificate
    report.outcome.update(ratio=str(cert.ratio), ratio_decimal=float(cert.ratio), rechecked=cert.recheck())
    print(f"{res.branch} certificate: ratio {both(cert.ratio)}", file=sys.stderr)
    if args.out:
        iio.dump(iio.certificate_to_json(cert), args.out)
        report.artifacts.append(args.out)
    return report, EXIT_FOUND


def cmd_estimate_bk(args) -> tuple[RunReport, int]:
    mech = _mechanism(args)
    consts = _consts(args, args.n)
    est = estimate_bad_fraction(mech, args.n, args.k, args.trials, consts, args.seed)
    report = RunReport("estimate-bk", {"mechanism": mechanism_config(mech), "n": args.n, "k": args.k}, [args.seed])
    report.outcome = est.to_json()
    print(
        f"b_{est.k} ~ {est.estimate:.4f} ({est.bad}/{est.trials}), 95% CI "
        f"[{est.ci_low:.4f}, {est.ci_high:.4f}], reference bound {est.reference_bound:.4g}",
        file=sys.stderr,
    )
    print(est.caveat, file=sys.stderr)
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# plumbing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--consts", help="constants profile JSON")
    common.add_argument("--out", help="output path")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    mech = argparse.ArgumentParser(add_help=False)
    mech.add_argument("--mech", choices=MECHANISM_IDS)
    mech.add_argument("--mech-config", help="mechanism configuration JSON")

    p = argparse.ArgumentParser(prog="truthsched", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write an instance corpus")
    g.add_argument("--kind", choices=("standard", "clustered", "matrix"), default="standard")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--ell", type=int, default=3)
    g.add_argument("--count", type=int, default=10)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", parents=[common, mech], help="exact Mech, Opt and ratio")
    e.add_argument("--instance", required=True)
    e.set_defaults(func=cmd_evaluate)

    w = sub.add_parser("wmon-check", parents=[common, mech], help="search for WMON violations")
    w.add_argument("--trials", type=int, default=10_000)
    w.add_argument("--generator", choices=GENERATORS, default="mixed")
    w.add_argument("--instance")
    w.set_defaults(func=cmd_wmon)

    c = sub.add_parser("classify-slice", parents=[common, mech], help="recognize the 2x2 class")
    c.add_argument("--instance")
    c.add_argument("--p", type=int)
    c.add_argument("--pprime", type=int)
    c.add_argument("--tol", default="1/1000000")
    c.add_argument("--budget", type=int, default=10_000)
    c.add_argument("--grid", type=int, default=64)
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("certify", parents=[common, mech], help="lower-bound certificate")
    r.add_argument("--n", type=int, required=True)
    r.set_defaults(func=cmd_certify)

    b = sub.add_parser("estimate-bk", parents=[common, mech], help="Monte Carlo bad-set fraction")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--trials", type=int, default=30)
    b.set_defaults(func=cmd_estimate_bk)
    return p


def _emit(report: RunReport, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(asdict(report), indent=2, default=str))
        return
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["key", "value"])
    for k, v in report.outcome.items():
        w.writerow([k, json.dumps(v, default=str) if isinstance(v, (dict, list)) else v])
    print(buf.getvalue(), end="")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args_echo = {k: v for k, v in vars(args).items() if k != "func"}
    t0 = time.perf_counter()
    try:
        report, code = args.func(args)
    except (UsageError, ContractViolation, ConfigurationError, UnsupportedMechanism, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.config = dict(args_echo, **report.config)
    report.wall_time = round(time.perf_counter() - t0, 3)
    _emit(report, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
