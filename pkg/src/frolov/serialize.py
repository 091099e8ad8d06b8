"""File formats: CSV tables, JSON reports, and run manifests.

Floating-point values in CSV output and in the generator JSON are rendered
with 17 significant digits, enough to round-trip binary64 exactly, so two
runs with the same manifest produce byte-identical files.  All outputs are
UTF-8 with Unix newlines.
"""
from __future__ import annotations

import json
import math
from typing import Iterable, TextIO

import numpy as np

from . import __version__ as _version
from .cubature import ConvergenceStudy, FitResult
from .dual import DualSpectrumReport
from .enumeration import LatticePointSet
from .errors import CertificationError, InvalidSpecError
from .fooling import FoolingDemo
from .generator import FrolovLattice, GeneratorPolynomial, Kind

#: Documented output policies, recorded in every manifest.
POLICIES = {
    "membership": "accept iff binary64 coordinates satisfy 0 <= x_i < 1, exact comparisons",
    "ordering": "lexicographic by integer preimage",
    "float_format": "%.17g",
    "weight": "1/n (the scale), not 1/point_count",
    "chebyshev_roots": "2*cos(pi*(2i-1)/2**(l+1)), i=1..d, where d = 2**l",
}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# CSV


def write_points_csv(stream: TextIO, blocks: Iterable, d: int) -> int:
    """Write ``l_1..l_d, x_1..x_d`` rows from (preimage, point) blocks."""
    header = [f"l_{i+1}" for i in range(d)] + [f"x_{i+1}" for i in range(d)]
    stream.write(",".join(header) + "\n")
    total = 0
    for preimages, points in blocks:
        for krow, xrow in zip(preimages, points):
            cells = [str(int(v)) for v in krow] + [fmt(v) for v in xrow]
            stream.write(",".join(cells) + "\n")
        total += len(preimages)
    return total


def point_set_blocks(point_set: LatticePointSet):
    yield point_set.integer_preimages, point_set.points


def write_study_csv(stream: TextIO, study: ConvergenceStudy) -> None:
    stream.write("n,count,value,reference,abs_error\n")
    for r in study.records:
        stream.write(
            f"{fmt(r.n)},{r.point_count},{fmt(r.value)},{fmt(r.reference)},{fmt(r.abs_error)}\n"
        )


def write_demo_csv(stream: TextIO, demo: FoolingDemo) -> None:
    stream.write("n,count,m,cubature_value,integral,predicted_shape\n")
    for r in demo.rows:
        stream.write(
            f"{fmt(r.n)},{r.point_count},{r.m},{fmt(r.cubature_value)},"
            f"{fmt(r.integral)},{fmt(r.predicted_shape)}\n"
        )


# ---------------------------------------------------------------------------
# JSON payloads


def _fit_payload(fit: FitResult | None, skip: str | None) -> dict:
    if fit is None:
        return {"skipped": skip or "unknown"}
    return {
        "main_rate": fit.main_rate,
        "log_exponent": fit.log_exponent,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "n_used": fit.n_used,
        "ridge_weight": fit.ridge_weight,
        "excluded": [{"n": n, "reason": reason} for n, reason in fit.excluded],
    }


def study_fit_payload(study: ConvergenceStudy) -> dict:
    payload = {
        "function": study.function_name,
        "fit": _fit_payload(study.fit, study.fit_skipped_reason),
    }
    if study.smoothness is not None:
        cls = study.smoothness
        payload["class"] = {"s": cls.s, "p": cls.p, "theta": cls.theta, "scale": cls.scale.value}
    if study.prediction is not None:
        pred = study.prediction
        payload["prediction"] = {
            "main_rate": pred.main_rate,
            "log_exponent": pred.log_exponent,
            "regime": pred.regime.value,
            "loglog_exponent": pred.loglog_exponent,
        }
    return payload


def demo_fit_payload(demo: FoolingDemo) -> dict:
    return {
        "variant": demo.variant,
        "class": {
            "s": demo.smoothness.s,
            "p": demo.smoothness.p,
            "theta": demo.smoothness.theta,
            "scale": demo.smoothness.scale.value,
        },
        "fit": _fit_payload(demo.fit, demo.fit_skipped_reason),
        "lower_bound_main": demo.lower_bound_main,
        "lower_bound_log_exponent": demo.lower_bound_log_exponent,
    }


def dual_report_payload(report: DualSpectrumReport) -> dict:
    return {
        "n": report.n,
        "dimension": report.dimension,
        "search_radius": report.search_radius,
        "m_max": report.m_max,
        "c1": report.c1,
        "c2": report.c2,
        "min_norm_product": report.min_norm_product,
        "argmin_point": list(report.argmin_point),
        "fitted_c": report.fitted_c,
        "max_density_ratio": report.max_density_ratio,
        "admissibility_guaranteed": report.admissibility_guaranteed,
        "z_counts": [{"m": list(m), "count": c} for m, c in report.z_counts],
    }


def generator_payload(poly: GeneratorPolynomial, lattice: FrolovLattice) -> dict:
    """The ``gen`` subcommand's JSON: floats as 17-digit strings, ints exact."""
    return {
        "dimension": poly.dimension,
        "kind": poly.kind.value,
        "n": fmt(lattice.n),
        "coefficients": None
        if poly.coefficients is None
        else [str(c) for c in poly.coefficients],
        "roots": [fmt(r) for r in poly.roots],
        "root_residuals": [fmt(r) for r in poly.residuals],
        "root_intervals": [[fmt(a), fmt(b)] for a, b in poly.intervals],
        "root_separation": fmt(poly.root_separation),
        "det_t_tilde": fmt(lattice.det_t_tilde),
        "t_n": [[fmt(v) for v in row] for row in lattice.t_n],
        "b_n": [[fmt(v) for v in row] for row in lattice.b_n],
        "chebyshev_root_formula": POLICIES["chebyshev_roots"],
    }


def lattice_from_payload(payload: dict) -> FrolovLattice:
    """Rebuild a lattice from ``generator_payload`` output, verifying invariants."""
    d = int(payload["dimension"])
    n = float(payload["n"])
    roots = tuple(float(r) for r in payload["roots"])
    coeffs = payload["coefficients"]
    poly = GeneratorPolynomial(
        dimension=d,
        kind=Kind(payload["kind"]),
        coefficients=None if coeffs is None else tuple(int(c) for c in coeffs),
        roots=roots,
        residuals=tuple(float(r) for r in payload["root_residuals"]),
        residual_bounds=tuple(math.inf for _ in roots),
        intervals=tuple((float(a), float(b)) for a, b in payload["root_intervals"]),
        root_separation=float(payload["root_separation"]),
    )
    t_n = np.array([[float(v) for v in row] for row in payload["t_n"]])
    b_n = np.array([[float(v) for v in row] for row in payload["b_n"]])
    det = float(payload["det_t_tilde"])
    scale = (n * det) ** (1.0 / d)
    t_tilde = t_n * scale
    det_t_n = float(np.linalg.det(t_n))
    if abs(det_t_n * n - 1.0) > 1e-10:
        raise CertificationError("reparsed lattice violates det(t_n) = 1/n")
    resid = np.abs(t_n.T @ b_n - np.eye(d)).max()
    if resid > 1e-10 * np.abs(b_n).max():
        raise CertificationError("reparsed lattice violates t_n^T b_n = I")
    for arr in (t_tilde, t_n, b_n):
        arr.setflags(write=False)
    return FrolovLattice(
        polynomial=poly, n=n, t_tilde=t_tilde, det_t_tilde=det, t_n=t_n, b_n=b_n
    )


# ---------------------------------------------------------------------------
# manifests


def manifest_payload(subcommand: str, options: dict) -> dict:
    clean = {}
    for key, value in options.items():
        if isinstance(value, np.generic):
            value = value.item()
        clean[key] = value
    return {
        "tool": "frolov",
        "version": _version,
        "subcommand": subcommand,
        "options": clean,
        "policies": dict(POLICIES),
    }


def dump_json(payload: dict, stream: TextIO) -> None:
    json.dump(payload, stream, indent=2, sort_keys=True)
    stream.write("\n")


def load_manifest(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if payload.get("tool") != "frolov" or "subcommand" not in payload:
        raise InvalidSpecError(f"{path} is not a frolov run manifest")
    return payload
