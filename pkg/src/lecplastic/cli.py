"""Command-line front end.

Exit codes: 0 success / plastic, 1 profile validation error, 2 I/O or parse
error, 3 not plastic (``decide``), 4 nothing to construct because the profile
is plastic (``witness``), 5 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources

from . import oracle
from .errors import CheckFailed, LecError, ProfileFormatError, ProfileValidationError
from .export import export_operator
from .operator import (
    SAMPLED_TOL,
    build_shift,
    chain_weights_bounded,
    groups_by_axis,
    truncate,
    verify_block_structure,
    verify_counterexample,
)
from .plasticity import FORMAT_VERSION, decide, describe_verdict, verdict_to_dict
from .profile import axes_prefix, format_rational, load_profile, loads_profile

log = logging.getLogger("lecplastic")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_NOT_PLASTIC = 3
EXIT_PLASTIC = 4
EXIT_CHECK_FAILED = 5

BUNDLED_PREFIX = "bundled:"


def bundled_names() -> list:
    files = resources.files("lecplastic") / "data"
    return sorted(f.name[:-5] for f in files.iterdir() if f.name.endswith(".json"))


def read_profile(path: str):
    """Load a profile file; ``bundled:NAME`` selects a profile shipped with the package."""
    if path.startswith(BUNDLED_PREFIX):
        name = path[len(BUNDLED_PREFIX):]
        res = resources.files("lecplastic") / "data" / f"{name}.json"
        if not res.is_file():
            raise ProfileFormatError(f"no bundled profile {name!r}; have {bundled_names()}")
        return loads_profile(res.read_text(encoding="utf-8"))
    return load_profile(path)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def cmd_decide(args) -> int:
    p = read_profile(args.profile)
    v = decide(p)
    if args.json:
        _emit({**verdict_to_dict(v), "profile": p.name})
    else:
        print(f"{p.name}: {describe_verdict(v)}")
    return EXIT_OK if v.plastic else EXIT_NOT_PLASTIC


def cmd_witness(args) -> int:
    p = read_profile(args.profile)
    v = decide(p)
    if v.plastic:
        print(f"{p.name} is plastic (tau = {format_rational(v.certificate.tau)}); "
              "no counterexample to construct", file=sys.stderr)
        return EXIT_PLASTIC
    op = build_shift(p, v.certificate)
    t = truncate(op, args.truncate)
    if args.inject_fault:
        t.matrix *= 1.25
    report = verify_counterexample(t)
    export = export_operator(op, t, report, args.chain)
    _emit(export.to_dict(), args.out)
    if args.out:
        print(f"{p.name}: operator norm {report.operator_norm:.15g}, "
              f"modified defect {report.modified_defect:.3g}, "
              f"contraction ratio {format_rational(report.contraction_ratio)} "
              f"at column {report.contraction_index}; written to {args.out}")
    return EXIT_OK


def _verify_rows(p, dims, samples, seed, inject_fault):
    """Run every check; yield ``(check, dim, ok, detail)`` rows."""
    v = decide(p)
    verdict = v.verdict
    yield ("decide", "-", True, verdict.value)
    tau_route = oracle.decide_by_tau_enumeration(p)
    yield ("oracle.tau_enumeration", "-", tau_route is verdict, tau_route.value)
    scanned = oracle.scan_pairwise_failures(p)
    yield ("oracle.pairwise_scan", "-", (not scanned) == v.plastic, f"{len(scanned)} witness(es)")

    if not v.plastic:
        problems = oracle.check_witness(v.certificate)
        yield ("witness.symbolic", "-", not problems, "; ".join(problems) or "no minimum, no maximum, two or more elements")
        op = build_shift(p, v.certificate)
        yield ("chain.weights_exact", "-", chain_weights_bounded(op), "w_k <= 1, w_0 < 1")
        for N in dims:
            t = truncate(op, N)
            if inject_fault:
                t.matrix *= 1.25
            try:
                r = verify_counterexample(t)
            except CheckFailed as exc:
                yield ("counterexample", N, False, str(exc))
                continue
            yield ("counterexample", N, True,
                   f"norm {r.operator_norm:.15g}, modified defect {r.modified_defect:.2g}, "
                   f"ratio {format_rational(r.contraction_ratio) if r.contraction_ratio else '-'}")
        return

    for N in dims:
        axes = axes_prefix(p, N)
        if len(axes) < N:
            log.info("profile supports only %d basis vectors; using that", len(axes))
        groups = groups_by_axis(axes)
        drawn = oracle.sample_preserving_maps(axes, samples, seed + N)
        kept = oracle.accepted_samples(axes, drawn)
        worst = 0.0
        for s in kept:
            matrix = s.matrix * 1.25 if inject_fault else s.matrix
            worst = max(worst, oracle.block_defect(
                verify_block_structure(matrix, groups=groups, axes=axes)))
        yield ("block_structure", len(axes), bool(kept) and worst <= SAMPLED_TOL,
               f"{len(kept)} accepted of {len(drawn)}, worst defect {worst:.2g}")
        detected = 0
        perturbed = [s for s in drawn if s.kind == "perturbed"]
        for s in perturbed:
            rep = verify_block_structure(s.matrix, groups=groups, axes=axes)
            if rep.operator_norm > 1 + 1e-6 or rep.block_violation > SAMPLED_TOL:
                detected += 1
        yield ("perturbed_detected", len(axes), detected == len(perturbed),
               f"{detected}/{len(perturbed)}")


def cmd_verify(args) -> int:
    p = read_profile(args.profile)
    decide(p)  # surfaces validation errors before any numerics
    rows = list(_verify_rows(p, args.dims, args.samples, args.seed, args.inject_fault))
    failed = [r for r in rows if not r[2]]
    if args.json:
        _emit({
            "format_version": FORMAT_VERSION,
            "profile": p.name,
            "passed": not failed,
            "checks": [{"check": c, "dimension": d, "ok": ok, "detail": det} for c, d, ok, det in rows],
        })
    else:
        width = max(len(r[0]) for r in rows)
        print(f"verification suite for {p.name}")
        for check, dim, ok, detail in rows:
            print(f"  {'PASS' if ok else 'FAIL'}  {check:<{width}}  {str(dim):>4}  {detail}")
        print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_profiles(args) -> int:
    for name in bundled_names():
        print(f"{BUNDLED_PREFIX}{name}")
    return EXIT_OK


def _dims(text: str) -> list:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lecplastic",
        description="Decide LEC-plasticity of Hilbert-space ellipsoids and build certificates.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decide", help="decide plasticity of a profile")
    d.add_argument("profile", help="profile JSON path, or bundled:NAME")
    d.add_argument("--json", action="store_true", help="emit the verdict as JSON")
    d.set_defaults(func=cmd_decide)

    w = sub.add_parser("witness", help="build and verify the chain-shift counterexample")
    w.add_argument("profile")
    w.add_argument("--truncate", type=int, default=64, metavar="N", help="matrix size (default 64)")
    w.add_argument("--chain", type=int, default=8, metavar="K", help="export chain positions |k| <= K")
    w.add_argument("--out", metavar="PATH", help="write the export here instead of stdout")
    w.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    w.set_defaults(func=cmd_witness)

    v = sub.add_parser("verify", help="run the verification suite")
    v.add_argument("profile")
    v.add_argument("--dims", type=_dims, default=[16, 32, 64], help="comma-separated truncation sizes")
    v.add_argument("--samples", type=int, default=50, help="sampled maps per kind and dimension")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json", action="store_true")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    lp = sub.add_parser("profiles", help="list bundled profiles")
    lp.set_defaults(func=cmd_profiles)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ProfileValidationError as exc:
        print(f"invalid profile: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ProfileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except LecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
