"""Command-line entry point.

    trilemma verify NET SPEC [--method full|box-exact|ibp|proxy] [--support FILE] [--tau T]
    trilemma partner NET --seed N [--out FILE]
    trilemma patch NET1 NET2 PLAN --spec SPEC [--tau T] [--out FILE]
    trilemma trilemma CONFIG [--output-dir DIR]

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input, 3 region cap hit.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounded import EXACT_ON_BOX, IBP, verify_bounded
from .diagonal import PreconditionError, build_unsound_pair
from .exact import verify_full
from .formats import FormatError, load_network, load_plan, load_spec, load_support, read_json, write_json
from .harness import TrilemmaConfig, run_trilemma_suite
from .network import DimensionError, to_fraction
from .proxy import ALIGNED, proxy_result
from .regions import DEFAULT_REGION_CAP, Box, RegionCapExceeded
from .symmetry import random_symmetric_partner

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

METHODS = ("full", "box-exact", "ibp", "proxy")


class InputError(Exception):
    pass


def _emit(data, out=None):
    if out:
        write_json(out, data)
    else:
        print(json.dumps(data, indent=2, default=str))


def cmd_verify(args) -> int:
    net = load_network(args.network)
    spec, dom = load_spec(args.spec, net.input_dim)
    spec.check_dims(net)
    if args.method == "proxy":
        if not args.support:
            raise InputError("--method proxy needs --support")
        support, file_tau = load_support(args.support)
        tau = to_fraction(args.tau) if args.tau is not None else file_tau
        res = proxy_result(net, spec, support, tau if tau is not None else 1)
        _emit({"method": "proxy", **res.to_dict()}, args.out)
        return EXIT_OK if res.verdict == ALIGNED else EXIT_FAIL
    if args.method == "full":
        verdict = verify_full(net, spec, dom, args.cap)
    else:
        if not isinstance(dom, Box):
            raise InputError(f"--method {args.method} needs a box domain in the spec")
        method = IBP if args.method == "ibp" else EXACT_ON_BOX
        verdict = verify_bounded(net, spec, dom, method, args.cap)
    _emit({"method": args.method, "domain": dom.to_dict(), **verdict.to_dict()}, args.out)
    return EXIT_OK if verdict.is_certified else EXIT_FAIL


def cmd_partner(args) -> int:
    net = load_network(args.network)
    try:
        partner, transforms = random_symmetric_partner(net, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit({"network": partner.to_dict(), "transforms": [t.to_dict() for t in transforms]}, args.out)
    return EXIT_OK


def cmd_patch(args) -> int:
    theta1, theta2 = load_network(args.theta1), load_network(args.theta2)
    plan = load_plan(args.plan)
    spec, _ = load_spec(args.spec, theta1.input_dim)
    tau = to_fraction(args.tau) if args.tau is not None else 1
    try:
        report = build_unsound_pair(theta1, theta2, plan, spec, tau, args.cap)
    except PreconditionError as exc:
        raise InputError(f"precondition failed on {exc}") from exc
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_trilemma(args) -> int:
    data = read_json(args.config) if args.config else {}
    if args.output_dir:
        data["output_dir"] = args.output_dir
    try:
        cfg = TrilemmaConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad config: {exc}") from exc
    report = run_trilemma_suite(cfg, write=True)
    for row in report["summary"]:
        mark = "PASS" if row["passed"] else "FAIL"
        note = " (truncated at region cap)" if row["truncated"] else ""
        print(f"{mark}  {row['pair_held']:<4} -> fails {row['fails']}  [{row['track']}]{note}")
        for check in row["failed_checks"]:
            print(f"      failed: {check}")
        err = report["tracks"][row["track"]].get("error")
        if err:
            print(f"      error: {err}")
    print(f"report written to {cfg.output_dir}")
    if not report["passed"]:
        return EXIT_FAIL
    return EXIT_CAP if report["truncated"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trilemma", description="Exact ReLU network verification tools")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--cap", type=int, default=DEFAULT_REGION_CAP, help="region cap")
        sp.add_argument("--out", "-o", help="write JSON here instead of stdout")

    v = sub.add_parser("verify", help="verify a linear output spec")
    v.add_argument("network")
    v.add_argument("spec")
    v.add_argument("--method", choices=METHODS, default="full")
    v.add_argument("--support", help="support file for --method proxy")
    v.add_argument("--tau", help="proxy threshold (rational)")
    common(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("partner", help="symmetric partner of a network")
    s.add_argument("network")
    s.add_argument("--seed", type=int, default=0)
    common(s)
    s.set_defaults(func=cmd_partner)

    d = sub.add_parser("patch", help="patch theta1 onto theta2 around a support")
    d.add_argument("theta1")
    d.add_argument("theta2")
    d.add_argument("plan")
    d.add_argument("--spec", required=True)
    d.add_argument("--tau", help="proxy threshold (rational, default 1)")
    common(d)
    d.set_defaults(func=cmd_patch)

    t = sub.add_parser("trilemma", help="run all three experiment tracks")
    t.add_argument("config", nargs="?", help="JSON config (defaults used if omitted)")
    t.add_argument("--output-dir")
    t.set_defaults(func=cmd_trilemma)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RegionCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, FormatError, DimensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
