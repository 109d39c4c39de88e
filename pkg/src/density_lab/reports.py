"""JSON/CSV rendering of reports.

Rationals are written exactly as ``"p/q"`` strings. Headline quantities also
get a ``*_decimal`` companion rendered to the configured number of digits.
Irrational quantities (the log ratio, the enclosed M threshold) only get
decimal renderings. Key order is sorted at dump time, so output is
byte-identical for identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any

from .covering import (
    CoveringVerification,
    DegeneracyRecord,
    EtaCovering,
    Witness,
    eq35_threshold,
    lemma1_threshold,
    log_ratio,
    m_threshold,
    r_threshold,
)
from .density import (
    ConsistencyReport,
    DensityReport,
    EstimatorConfig,
    ExplicitSampling,
    IntegerSampling,
    RealSampling,
)
from .exact import to_decimal
from .intervals import Certificate, RatioClassReport

SCHEMA = 1


def q(value: Fraction | None) -> str | None:
    return None if value is None else str(value)


def dec(value: Fraction | None) -> str | None:
    return None if value is None else str(to_decimal(value))


def dumps(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA, **payload}, sort_keys=True, indent=2) + "\n"


def config_dict(config: EstimatorConfig) -> dict[str, Any]:
    s = config.sampling
    if isinstance(s, RealSampling):
        sampling: dict[str, Any] = {
            "kind": "real",
            "gamma": q(s.gamma),
            "resolution": s.resolution,
            "merge_integers": s.merge_integers,
        }
    elif isinstance(s, IntegerSampling):
        sampling = {"kind": "integer"}
    elif isinstance(s, ExplicitSampling):
        sampling = {"kind": "explicit", "points": [q(p) for p in s.points]}
    else:  # pragma: no cover
        raise TypeError(s)
    return {
        "xi_grid": [q(x) for x in config.xi_grid],
        "t0": q(config.t0),
        "t": q(config.t),
        "sampling": sampling,
        "boundary_correction": config.boundary_correction,
        "tau": q(config.tau),
        "witness_rule": config.witness_rule,
    }


def density_dict(report: DensityReport) -> dict[str, Any]:
    return {
        "config": config_dict(report.config),
        "estimate": q(report.estimate),
        "estimate_decimal": dec(report.estimate),
        "argmax": {"xi": q(report.argmax_xi), "x": q(report.argmax_x)},
        "n_points": report.n_points,
        "per_xi": [
            {
                "xi": q(row.xi),
                "estimate": q(row.estimate),
                "estimate_decimal": dec(row.estimate),
                "argmax_x": q(row.argmax),
                "raw_estimate": q(row.raw_estimate),
                "raw_argmax_x": q(row.raw_argmax),
                "drift_estimate": q(row.drift_estimate),
            }
            for row in report.per_xi
        ],
    }


def density_csv(reports: dict[str, DensityReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sampling", "xi", "p_hat", "x_star", "raw_p_hat", "drift_p_hat"])
    for name, report in reports.items():
        for row in report.per_xi:
            writer.writerow(
                [
                    name,
                    float(row.xi),
                    float(row.estimate),
                    float(row.argmax),
                    float(row.raw_estimate),
                    "" if row.drift_estimate is None else float(row.drift_estimate),
                ]
            )
    return buf.getvalue()


def _threshold_values(cov: EtaCovering) -> dict[str, Any]:
    p = cov.params
    lr = log_ratio(p.xi, p.eta)
    m = m_threshold(p.xi, p.eta)
    e35 = eq35_threshold(p.xi, p.eta)
    return {
        "log_ratio_floor": lr.floor,
        "log_ratio_ceil": lr.ceil,
        "log_ratio_integer": lr.integer,
        "log_ratio_decimal": dec((lr.lo + lr.hi) / 2),
        "r_q": q(r_threshold(p.eta, lr.ceil)),
        "lemma1": q(lemma1_threshold(p.xi, p.eta)),
        "M_lower": dec(m.lower),
        "M_upper": dec(m.upper),
        "prediction": q(e35.value),
        "prediction_integer_case": e35.integer_case,
    }


def covering_dict(
    cov: EtaCovering,
    verification: CoveringVerification,
    predicted: frozenset[int],
    degeneracy: DegeneracyRecord | None,
    witness: Witness | None = None,
) -> dict[str, Any]:
    p = cov.params
    out: dict[str, Any] = {
        "params": {"x": q(p.x), "xi": q(p.xi), "eta": q(p.eta)},
        "table": [{"i": i, "a": q(a), "b": b} for i, (a, b) in enumerate(zip(cov.a, cov.b))],
        "d": cov.d,
        "predicted_d": sorted(predicted),
        "thresholds_met": cov.thresholds_met,
        "thresholds": _threshold_values(cov),
        "checks": [{"name": c.name, "status": c.status, "detail": c.detail} for c in verification.checks],
        "all_pass": verification.ok,
        "total_length": q(cov.total_length),
        "degenerate": None
        if degeneracy is None
        else {
            "index": degeneracy.index,
            "eta_equals_b1_over_b0": degeneracy.eta_equals_b1_over_b0,
            "x_equals_b0": degeneracy.x_equals_b0,
            "a_closed_form": degeneracy.a_closed_form,
        },
    }
    if witness is not None:
        out["witness"] = {
            "n": witness.n,
            "index": witness.index,
            "ratio": q(witness.ratio),
            "ratio_decimal": dec(witness.ratio),
            "bound": q(witness.bound),
            "bound_decimal": dec(witness.bound),
        }
    return out


def covering_csv(cov: EtaCovering) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "a", "b", "a_float"])
    for i, (a, b) in enumerate(zip(cov.a, cov.b)):
        writer.writerow([i, str(a), b, float(a)])
    return buf.getvalue()


def _class_dict(report: RatioClassReport) -> dict[str, Any]:
    sym = report.symbolic_limsup
    return {
        "finite_limsup_estimate": q(report.finite_limsup_estimate),
        "symbolic_limsup": None if sym is None else ("inf" if sym == float("inf") else q(sym)),
        "member_of_A": report.member_of_A,
        "finite_member_of_A": report.finite_member_of_A,
        "window": list(report.window),
    }


def certificate_dict(cert: Certificate) -> dict[str, Any]:
    return {
        "rate": q(cert.rate),
        "ratio_set": str(cert.ratio_set),
        "start_index": cert.start_index,
        "checked_upto": cert.checked_upto,
        "substantial_verdict": cert.substantial_verdict,
        "class_report": _class_dict(cert.class_report),
        "class_undetermined": cert.class_undetermined,
        "accepted": cert.accepted,
        "reason": cert.reason,
        "min_ratio": q(cert.min_ratio),
        "min_ratio_decimal": dec(cert.min_ratio),
        "transcript": [{"n": r.n, "a": q(r.a), "b": q(r.b), "ratio": q(r.ratio)} for r in cert.transcript],
    }


def certificate_csv(cert: Certificate) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "a", "b", "ratio"])
    for r in cert.transcript:
        writer.writerow([r.n, float(r.a), float(r.b), float(r.ratio)])
    return buf.getvalue()


def consistency_dict(rep: ConsistencyReport) -> dict[str, Any]:
    ext = rep.extraction
    return {
        "density": density_dict(rep.density),
        "xi_star": q(rep.xi_star),
        "rate": q(rep.rate),
        "witness_rule": rep.witness_rule,
        "n_witnesses": rep.n_witnesses,
        "extracted": {
            "xi": q(ext.xi),
            "points": [q(y) for y in ext.points],
            "ell": q(ext.ell.value),
            "ell_decimal": dec(ext.ell.value),
            "ell_wide": q(ext.ell.wide_value),
            "ell_window": list(ext.ell.window),
        },
        "gap": q(rep.gap),
        "gap_decimal": dec(rep.gap),
        "certificate": certificate_dict(rep.certificate),
    }
