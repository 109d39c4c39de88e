"""Command-line front end.

Subcommands: ``density``, ``covering``, ``certify`` and ``verify-lemmas``.
Exit status: 0 success, 1 suite/check failure, 2 invalid input, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import reports
from .covering import (
    CoveringParams,
    build_eta_covering,
    degenerate_check,
    m_threshold,
    predicted_d,
    verify_covering,
    witness_integer,
)
from .density import (
    EstimatorConfig,
    IntegerSampling,
    RealSampling,
    compare_bm_polya,
    polya_estimate,
)
from .errors import ConsequenceViolation, DensityLabError, ValidationError
from .exact import to_fraction
from .intervals import (
    ALL_RATIOS,
    ConstantRatio,
    FinitePrefixOnly,
    HalfOpenInterval,
    IntervalFamily,
    PowerRatio,
    RatioSet,
    bm_certificate,
    geometric_family,
)
from .lemma_suite import SUITES, run_suites
from .seqcore import (
    ArithmeticProgression,
    BlockIntegers,
    CountingOracle,
    ExplicitList,
    FileBacked,
    PolynomialValues,
    PrimesUpTo,
    build_sequence,
)

log = logging.getLogger("density_lab")

EXIT_OK, EXIT_FAILURE, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


# --------------------------------------------------------------------------
# argument parsing helpers


def _rationals(text: str) -> list[Fraction]:
    return [to_fraction(part) for part in text.split(",") if part.strip()]


def parse_sequence(text: str):
    """Inline sequence description, e.g. ``arith:1,0`` or ``primes:100000``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    args = _rationals(rest) if rest.strip() else []
    if kind == "arith":
        if not 1 <= len(args) <= 2:
            raise ValidationError("arith takes step[,offset]")
        return ArithmeticProgression(args[0], args[1] if len(args) > 1 else Fraction(0))
    if kind == "primes":
        if len(args) != 1 or args[0].denominator != 1:
            raise ValidationError("primes takes one integer bound")
        return PrimesUpTo(int(args[0]))
    if kind == "poly":
        if len(args) < 2:
            raise ValidationError("poly takes coefficients c0,c1,... (lowest degree first)")
        if any(c.denominator != 1 for c in args):
            raise ValidationError("poly coefficients must be integers")
        return PolynomialValues(tuple(args))
    if kind == "blocks":
        ints = [int(a) for a in args]
        if any(a != b for a, b in zip(ints, args)) or len(ints) > 4:
            raise ValidationError("blocks takes integers base,ratio,k_max[,k_min]")
        defaults = [4, 2, 8, 0]
        base, ratio, k_max, k_min = ints + defaults[len(ints):]
        return BlockIntegers.geometric(base, ratio, k_max, k_min)
    if kind == "list":
        if not args:
            raise ValidationError("list needs at least one term")
        return ExplicitList(tuple(args))
    raise ValidationError(f"unknown sequence kind {kind!r}")


def _oracle(args: argparse.Namespace) -> tuple[CountingOracle, str]:
    if (args.seq is None) == (args.file is None):
        raise ValidationError("give exactly one of --seq and --file")
    if args.seq is not None:
        spec = parse_sequence(args.seq)
        label = args.seq
    else:
        horizon = None if args.horizon is None else to_fraction(args.horizon)
        spec = FileBacked(Path(args.file), horizon)
        label = f"file:{args.file}"
    return build_sequence(spec), label


def parse_family(text: str) -> IntervalFamily:
    """``geo:ratio[,spacing[,anchor]]``, ``power:c,p[,anchor]`` or a JSON file path."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "geo":
        vals = _rationals(rest)
        if not 1 <= len(vals) <= 3:
            raise ValidationError("geo takes ratio[,spacing[,anchor]]")
        spacing = vals[1] if len(vals) > 1 else None
        anchor = vals[2] if len(vals) > 2 else Fraction(1)
        return geometric_family(vals[0], spacing, anchor)
    if kind == "power":
        vals = _rationals(rest)
        if not 2 <= len(vals) <= 3:
            raise ValidationError("power takes c,p[,anchor]")
        return IntervalFamily((), PowerRatio(vals[0], vals[1]), vals[2] if len(vals) > 2 else Fraction(1))
    return load_family_file(Path(text))


def load_family_file(path: Path) -> IntervalFamily:
    """JSON: {"prefix": [[a, b], ...], "tail": {"kind": "constant"|"power"|"finite", ...}, "anchor": "1"}."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return _family_from_json(data)
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"{path}: malformed family description: {exc!r}") from exc


def _family_from_json(data: dict) -> IntervalFamily:
    prefix = tuple(HalfOpenInterval(to_fraction(str(a)), to_fraction(str(b))) for a, b in data.get("prefix", []))
    tail = data.get("tail", {"kind": "finite"})
    kind = tail.get("kind", "finite")
    if kind == "constant":
        spacing = tail.get("spacing")
        tail_obj = ConstantRatio(
            to_fraction(str(tail["ratio"])),
            None if spacing is None else to_fraction(str(spacing)),
            bool(tail.get("extendable", True)),
        )
    elif kind == "power":
        tail_obj = PowerRatio(to_fraction(str(tail["c"])), to_fraction(str(tail["p"])))
    elif kind == "finite":
        tail_obj = FinitePrefixOnly()
    else:
        raise ValidationError(f"unknown tail kind {kind!r}")
    return IntervalFamily(prefix, tail_obj, to_fraction(str(data.get("anchor", "1"))))


def _estimator_config(args: argparse.Namespace, sampling: str) -> EstimatorConfig:
    if sampling == "integer":
        scheme = IntegerSampling()
    else:
        scheme = RealSampling(gamma=to_fraction(args.gamma))
    return EstimatorConfig(
        tuple(_rationals(args.xi)),
        to_fraction(args.t0),
        to_fraction(args.t),
        scheme,
        boundary_correction=not args.no_boundary_correction,
        tau=to_fraction(args.tau),
        witness_rule=args.witness_rule,
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    log.info("wrote %s", out)


# --------------------------------------------------------------------------
# subcommands


def cmd_density(args: argparse.Namespace) -> int:
    oracle, label = _oracle(args)
    kinds = ["integer", "real"] if args.sampling == "both" else [args.sampling]
    results = {kind: polya_estimate(oracle, _estimator_config(args, kind)) for kind in kinds}
    for kind, rep in results.items():
        log.info("%s sampling: p_hat = %.6f at xi=%s, x=%s", kind, float(rep.estimate), rep.argmax_xi, rep.argmax_x)
    if args.format == "csv":
        _emit(reports.density_csv(results), args.out)
        return EXIT_OK
    payload = {
        "command": "density",
        "sequence": label,
        "reports": {kind: reports.density_dict(rep) for kind, rep in results.items()},
    }
    if len(results) == 2:
        gap = abs(results["integer"].estimate - results["real"].estimate)
        payload["integer_real_gap"] = reports.q(gap)
        payload["integer_real_gap_decimal"] = reports.dec(gap)
    _emit(reports.dumps(payload), args.out)
    return EXIT_OK


def cmd_covering(args: argparse.Namespace) -> int:
    params = CoveringParams(to_fraction(args.x), to_fraction(args.xi), to_fraction(args.eta))
    cov = build_eta_covering(params)
    verification = verify_covering(cov)
    witness = None
    label = None
    if args.seq is not None or args.file is not None:
        oracle, label = _oracle(args)
        if m_threshold(params.xi, params.eta).met_by(params.x):
            witness = witness_integer(oracle, params)
        else:
            log.warning("x is not certified above M(xi, eta); no witness integer computed")
    for check in verification.failures:
        log.error("check %s failed: %s", check.name, check.detail)
    if args.format == "csv":
        _emit(reports.covering_csv(cov), args.out)
    else:
        body = reports.covering_dict(cov, verification, predicted_d(params), degenerate_check(cov), witness)
        payload = {"command": "covering", "sequence": label, **body}
        _emit(reports.dumps(payload), args.out)
    return EXIT_OK if verification.ok else EXIT_FAILURE


def cmd_certify(args: argparse.Namespace) -> int:
    oracle, label = _oracle(args)
    ratio_set = RatioSet.parse(args.ratio_class) if args.ratio_class else None
    if args.family is None:
        # no family given: extract one from near-argmax witnesses
        config = _estimator_config(args, args.sampling)
        rep = compare_bm_polya(oracle, config)
        cert = rep.certificate
        if args.rate is not None or ratio_set is not None:
            cert = bm_certificate(
                oracle,
                rep.extraction.family,
                rep.extraction.n_intervals,
                rep.rate if args.rate is None else to_fraction(args.rate),
                rep.certificate.ratio_set if ratio_set is None else ratio_set,
                args.start_index,
            )
        body = {"consistency": reports.consistency_dict(rep), "certificate": reports.certificate_dict(cert)}
    else:
        family = parse_family(args.family)
        rate = Fraction(0) if args.rate is None else to_fraction(args.rate)
        cert = bm_certificate(oracle, family, args.n_terms, rate, ALL_RATIOS if ratio_set is None else ratio_set, args.start_index)
        body = {"family": args.family, "certificate": reports.certificate_dict(cert)}
    log.info("certificate %s (reason: %s)", "accepted" if cert.accepted else "rejected", cert.reason)
    if args.format == "csv":
        _emit(reports.certificate_csv(cert), args.out)
    else:
        _emit(reports.dumps({"command": "certify", "sequence": label, **body}), args.out)
    return EXIT_OK


def cmd_verify_lemmas(args: argparse.Namespace) -> int:
    if args.trials == 0:
        log.warning("--trials 0: empty suite, nothing checked")
    names = args.suite or None
    summary = run_suites(args.trials, args.seed, names)
    payload = {
        "command": "verify-lemmas",
        "seed": summary.seed,
        "trials": summary.trials,
        "total_cases": summary.total_cases,
        "total_failures": summary.total_failures,
        "suites": [
            {"name": r.name, "cases": r.cases, "failures": len(r.failures), "examples": r.failures[:5]}
            for r in summary.results
        ],
    }
    for r in summary.results:
        log.info("%-28s %5d cases  %d failures", r.name, r.cases, len(r.failures))
    _emit(reports.dumps(payload), args.out)
    return EXIT_OK if summary.total_failures == 0 else EXIT_FAILURE


# --------------------------------------------------------------------------
# parser


def _add_sequence_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seq", help="inline sequence: arith:q[,r] | primes:N | poly:c0,c1,... | blocks[:base,ratio,kmax,kmin] | list:t1,t2,...")
    p.add_argument("--file", help="file with one term per line")
    p.add_argument("--horizon", help="horizon for --file (default: last term)")


def _add_estimator_args(p: argparse.ArgumentParser, t0: str) -> None:
    p.add_argument("--xi", default="1/2,9/10,99/100", help="comma-separated xi grid")
    p.add_argument("--t0", default=t0, help="left end of the tail window")
    p.add_argument("--t", default="100000", help="right end of the tail window")
    p.add_argument("--gamma", default="1001/1000", help="geometric grid factor for real sampling")
    p.add_argument("--tau", default="1/100", help="slack below p_hat used for witnesses and the certified rate")
    p.add_argument("--witness-rule", default="near-max", choices=["near-max", "top-decile"])
    p.add_argument("--no-boundary-correction", action="store_true", help="use raw window counts")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", default="json", choices=["json", "csv"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="density-lab", description="Density estimates for increasing sequences.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="estimate the upper Polya density")
    _add_sequence_args(p)
    _add_estimator_args(p, "1000")
    p.add_argument("--sampling", default="real", choices=["real", "integer", "both"])
    _add_output_args(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("covering", help="build and verify the eta-covering of (xi x, x]")
    p.add_argument("--x", required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--eta", required=True)
    _add_sequence_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_covering)

    p = sub.add_parser("certify", help="certify a rate with a substantial interval family")
    _add_sequence_args(p)
    p.add_argument("--family", help="geo:ratio[,spacing[,anchor]] | power:c,p[,anchor] | path to JSON")
    p.add_argument("--rate", help="rate R to certify")
    p.add_argument("--class", dest="ratio_class", help='ratio set A, e.g. "{1}", "(1,inf]", "[1,2]"')
    p.add_argument("--n-terms", type=int, default=20, help="intervals checked for a given family")
    p.add_argument("--start-index", type=int, default=None)
    _add_estimator_args(p, "1")
    p.add_argument("--sampling", default="integer", choices=["real", "integer"])
    _add_output_args(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify-lemmas", help="randomized exact checks of the covering lemmas")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", action="append", choices=sorted(SUITES), help="restrict to a suite (repeatable)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_verify_lemmas)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        if getattr(args, "trials", 0) < 0:
            raise ValidationError("--trials must be nonnegative")
        return args.func(args)
    except ValidationError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INVALID
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except ConsequenceViolation as exc:
        log.error("internal consistency check failed: %s", exc)
        return EXIT_FAILURE
    except DensityLabError as exc:  # pragma: no cover
        log.error("%s", exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
