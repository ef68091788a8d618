"""Conformal invariants (F_2, int Q, chi, int|W|^2, Y) and connected-sum arithmetic.

Yamabe invariants are never computed here: each record carries a supplied
value together with a provenance string. Every hypothesis uses strict
inequalities, and a case sitting exactly on a threshold is rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cone_algebra as ca
from .errors import ConfigurationError, HypothesisFailure
from .model_geometry import (
    CGB_REL_TOL,
    CurvaturePackage,
    ProductSurfaces,
    RoundS4,
    S1xS3,
    cgb_residual,
    curvature_of,
    f2_density,
    q_curvature_constant,
)

PI2 = math.pi**2
Y_S4 = 8.0 * math.sqrt(6.0) * math.pi
Y_RP4 = 8.0 * math.sqrt(3.0) * math.pi
Y_CP2 = 12.0 * math.sqrt(2.0) * math.pi
Y_S2XS2 = 16.0 * math.pi
PAIR_SUM_THRESHOLD = 4.0 * math.sqrt(3.0) * math.pi
MAX_K_THEOREM = 7  # k < 8
MAX_L_THEOREM = 8  # l < 9
BOUNDARY_REL_TOL = 1e-12  # |Y^2 - threshold^2| below this (relative) counts as equality


def y_del_pezzo(l: int) -> float:
    """Yamabe invariant of the Kahler-Einstein metric on CP2 # l CP2-bar, 3 <= l <= 8."""
    return 4.0 * math.pi * math.sqrt(2.0 * (9 - l))


@dataclass(frozen=True)
class TopologyRecord:
    name: str
    chi: int
    weyl_l2: float
    yamabe: float
    q_total: float
    provenance: str = ""
    closed_form: bool = True

    @property
    def f2(self) -> float:
        return 2.0 * self.q_total

    @property
    def cgb_residual(self) -> float:
        return cgb_residual(self.chi, self.weyl_l2, self.f2)

    def validate(self) -> "TopologyRecord":
        if self.weyl_l2 < 0.0:
            raise ConfigurationError(f"{self.name}: weyl_l2 must be nonnegative")
        if self.closed_form and self.cgb_residual > CGB_REL_TOL:
            raise ConfigurationError(f"{self.name}: Chern-Gauss-Bonnet residual {self.cgb_residual:.3e}")
        return self


# -- invariants from curvature -----------------------------------------------------


def f2_both(pkg: CurvaturePackage) -> tuple[float, float]:
    """F_2 from int(-|Ric|^2/2 + R^2/6) and from 4 int sigma2(A^1); homogeneous backgrounds only."""
    return f2_density(pkg) * pkg.volume, 4.0 * float(ca.sigma2(pkg.schouten1)) * pkg.volume


def f2_invariant(pkg: CurvaturePackage, rel_tol: float = 1e-10) -> float:
    ricci_form, schouten_form = f2_both(pkg)
    scale = max(abs(ricci_form), abs(schouten_form), 1e-300)
    if abs(ricci_form - schouten_form) > rel_tol * max(scale, 1.0):
        raise ArithmeticError(f"F_2 formulas disagree: {ricci_form!r} vs {schouten_form!r}")
    return ricci_form


def record_from_package(name: str, pkg: CurvaturePackage, yamabe: float, provenance: str) -> TopologyRecord:
    _, q_total = q_curvature_constant(pkg)
    return TopologyRecord(name, pkg.euler, pkg.weyl_l2, yamabe, q_total, provenance).validate()


def einstein_record(name: str, chi: int, yamabe: float, provenance: str) -> TopologyRecord:
    """Positive Einstein metric attaining Y: F_2 = Y^2/24, int Q = Y^2/48, int|W|^2 from CGB."""
    q_total = yamabe**2 / 48.0
    weyl_l2 = 8.0 * PI2 * chi - 2.0 * q_total
    return TopologyRecord(
        name, chi, weyl_l2, yamabe, q_total, provenance + "; int|W|^2 identity-derived from CGB"
    ).validate()


def builtin_records(hyperbolic_genus: int = 2) -> dict[str, TopologyRecord]:
    recs = [
        record_from_package("S4", curvature_of(RoundS4(1.0)), Y_S4, "round metric; Y = 8 sqrt6 pi"),
        record_from_package(
            "S1xS3",
            curvature_of(S1xS3(2.0 * math.pi, 1.0)),
            Y_S4,
            "product metric; Y supplied as the value approached by LCF metrics (a bound, not computed)",
        ),
        record_from_package("S2xS2", curvature_of(ProductSurfaces(1.0, 1.0, 4 * math.pi, 4 * math.pi)),
                            Y_S2XS2, "product metric; Y = 16 pi"),
        einstein_record("CP2", 3, Y_CP2, "Fubini-Study; Y = 12 sqrt2 pi"),
        einstein_record("RP4", 1, Y_RP4, "round quotient; Y = 8 sqrt3 pi"),
    ]
    for l in range(3, 9):
        recs.append(einstein_record(f"CP2#{l}CP2bar", 3 + l, y_del_pezzo(l),
                                    f"Kahler-Einstein del Pezzo; Y = 4 pi sqrt(2(9-{l}))"))
    area = 4.0 * math.pi * (hyperbolic_genus - 1)
    hyp = curvature_of(ProductSurfaces(-1.0, -1.0, area, area))
    recs.append(record_from_package(
        "SigmaxSigma_hyperbolic", hyp, hyp.scalar * math.sqrt(hyp.volume),
        f"product of genus-{hyperbolic_genus} hyperbolic surfaces; Einstein with R < 0 so Y = R sqrt(Vol)",
    ))
    return {r.name: r for r in recs}


def save_records(records, path) -> None:
    payload = [asdict(r) for r in records]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_records(path) -> list[TopologyRecord]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return [TopologyRecord(**item).validate() for item in payload]
    except (TypeError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"malformed ledger file {path}: {exc}") from exc


# -- hypothesis checks -------------------------------------------------------------------


def _require_positive_yamabe(rec: TopologyRecord) -> None:
    if not rec.yamabe > 0.0:
        raise HypothesisFailure(f"{rec.name}: hypothesis fails: R < 0 (Yamabe invariant {rec.yamabe:.6g} <= 0)")


def check_assumption_main(rec: TopologyRecord, t0: float) -> tuple[float, bool]:
    """lambda_t0 = F_2 + (1/6)(1 - t0)(2 - t0) Y^2 and whether it is positive."""
    if t0 > 1.0:
        raise ConfigurationError(f"t0 must be <= 1, got {t0}")
    _require_positive_yamabe(rec)
    lam = 2.0 * (rec.q_total + rec.yamabe**2 * ((1.0 - t0) * (2.0 - t0)) / 12.0)
    return lam, lam > 0.0


def check_assumption_paneitz(rec: TopologyRecord) -> bool:
    """int Q + Y^2/6 > 0; cross-checked against the t0 = 0 case of the main assumption."""
    _require_positive_yamabe(rec)
    holds = rec.q_total + rec.yamabe**2 / 6.0 > 0.0
    _, main_holds = check_assumption_main(rec, 0.0)
    if holds != main_holds:
        raise ArithmeticError(f"{rec.name}: normalizations disagree")
    return holds


def yamabe_lower_diagnostic(pkg: CurvaturePackage, y_supplied: float, rel_tol: float = 1e-12) -> bool:
    """int R^2 dvol >= Y^2 (Hoelder); equality at a Yamabe metric is accepted up to rounding."""
    if pkg.scalar <= 0.0:
        raise HypothesisFailure("yamabe_lower_diagnostic needs constant positive scalar curvature")
    lhs = pkg.scalar**2 * pkg.volume
    return lhs >= y_supplied**2 * (1.0 - rel_tol)


# -- connected sums --------------------------------------------------------------------------


@dataclass(frozen=True)
class SurgeryVerdict:
    admissible: bool
    detail: str
    chi_result: int
    margin: float


def _strictly_above(y2: float, threshold2: float) -> bool:
    """Y^2 > threshold^2 with near-equality (rounding of closed forms) treated as equality."""
    return y2 - threshold2 > BOUNDARY_REL_TOL * threshold2


def surgery_check(base: TopologyRecord, k_s1s3: int, l_rp4: int) -> SurgeryVerdict:
    """Admissibility of base # k(S1xS3) # l(RP4) for the constant-Q criterion.

    S1xS3 summands need Y > 4 sqrt(3k) pi and k < 8; RP4 summands need
    Y > 8 sqrt3 pi and l < 9. ``margin`` is the smallest (Y^2 - threshold^2)/3.
    """
    if k_s1s3 < 0 or l_rp4 < 0:
        raise ConfigurationError("summand counts must be nonnegative")
    if base.q_total < 0.0:
        raise HypothesisFailure(f"{base.name}: theorem needs int Q >= 0, got {base.q_total:.6g}")
    y2 = base.yamabe**2 if base.yamabe > 0 else -math.inf
    chi = base.chi - 2 * k_s1s3 - l_rp4
    notes = []
    ok = True
    margins = []
    if k_s1s3 > 0:
        threshold = 4.0 * math.sqrt(3.0 * k_s1s3) * math.pi
        margin = (y2 - 48.0 * k_s1s3 * PI2) / 3.0
        margins.append(margin)
        y_ok = base.yamabe > 0 and _strictly_above(y2, 48.0 * k_s1s3 * PI2)
        k_ok = k_s1s3 <= MAX_K_THEOREM
        ok &= y_ok and k_ok
        largest = _largest_k(base.yamabe)
        notes.append(
            f"k={k_s1s3}: Y={base.yamabe:.10g} vs 4 sqrt(3k) pi={threshold:.10g} "
            f"({'ok' if y_ok else 'boundary' if abs(margin) <= BOUNDARY_REL_TOL * 16.0 * k_s1s3 * PI2 else 'fails'}); "
            f"theorem bound k < 8 ({'ok' if k_ok else 'fails'}); largest k allowed by this Y: {largest}"
        )
    if l_rp4 > 0:
        margin = (y2 - 192.0 * PI2) / 3.0
        margins.append(margin)
        y_ok = base.yamabe > 0 and _strictly_above(y2, 192.0 * PI2)
        l_ok = l_rp4 <= MAX_L_THEOREM
        ok &= y_ok and l_ok
        notes.append(
            f"l={l_rp4}: Y={base.yamabe:.10g} vs 8 sqrt3 pi={Y_RP4:.10g} "
            f"({'ok' if y_ok else 'boundary' if abs(margin) <= BOUNDARY_REL_TOL * 64.0 * PI2 else 'fails'}); "
            f"l < 9 ({'ok' if l_ok else 'fails'}); slack 8 pi^2 (8 - l) + delta = {8 * PI2 * (8 - l_rp4) + margin:.10g}"
        )
    if not notes:
        notes.append("no summands")
    notes.append(f"chi(N) = {chi}")
    return SurgeryVerdict(bool(ok), "; ".join(notes), chi, min(margins) if margins else math.inf)


def _largest_k(yamabe: float) -> int:
    k = 0
    while k < MAX_K_THEOREM and yamabe > 0 and _strictly_above(yamabe**2, 48.0 * (k + 1) * PI2):
        k += 1
    return k


def lcf_sum_check(k: int, l: int) -> bool:
    """k(S1xS3) # l(RP4) with Y ~ 8 sqrt3 pi: 8 pi^2 (2 - 2k - l) + Y^2/3 > 0, i.e. 2k + l < 10.

    Evaluated exactly in units of pi^2 (Y^2 / pi^2 = 192).
    """
    if k < 0 or l < 0 or (k == 0 and l == 0):
        raise ConfigurationError("need k, l >= 0, not both zero")
    return 8 * (2 - 2 * k - l) + Fraction(192, 3) > 0


def pair_sum_check(a: TopologyRecord, b: TopologyRecord) -> bool:
    """M1 # M2 qualifies when both int Q >= 0 and both Y > 4 sqrt3 pi."""
    for rec in (a, b):
        if rec.q_total < 0.0:
            raise HypothesisFailure(f"{rec.name}: needs int Q >= 0")
    t2 = PAIR_SUM_THRESHOLD**2
    return all(r.yamabe > 0 and _strictly_above(r.yamabe**2, t2) for r in (a, b))


# -- tables -------------------------------------------------------------------------------------


def invariants_table(records: dict[str, TopologyRecord] | None = None) -> list[dict]:
    records = records or builtin_records()
    rows = []
    for rec in records.values():
        try:
            verdict = "true" if check_assumption_paneitz(rec) else "false"
        except HypothesisFailure:
            verdict = "hypothesis fails: R < 0"
        rows.append({
            "name": rec.name,
            "chi": rec.chi,
            "weyl_l2": rec.weyl_l2,
            "F2": rec.f2,
            "int_Q": rec.q_total,
            "Y": rec.yamabe,
            "assumption_paneitz": verdict,
            "cgb_residual": rec.cgb_residual,
        })
    return rows


def examples_table(records: dict[str, TopologyRecord] | None = None) -> list[dict]:
    """Connected-sum families with every candidate count, including the first rejected ones."""
    records = records or builtin_records()
    rows = []

    def add(family, base, k, l, verdict):
        rows.append({"family": family, "base": base, "k": k, "l": l,
                     "admissible": verdict.admissible, "detail": verdict.detail})

    for base in ("S2xS2", "CP2"):
        for k in range(1, 9):
            add(f"({base})#k(S1xS3)", base, k, 0, surgery_check(records[base], k, 0))
    for l in range(1, 10):
        add("(CP2)#k(RP4)", "CP2", 0, l, surgery_check(records["CP2"], 0, l))
    for l in range(3, 9):
        name = f"CP2#{l}CP2bar"
        add("(CP2#lCP2bar)#(S1xS3)", name, 1, l, surgery_check(records[name], 1, 0))
    for k in range(0, 6):
        for l in range(0, 11):
            if k == 0 and l == 0:
                continue
            ok = lcf_sum_check(k, l)
            rows.append({"family": "k(S1xS3)#l(RP4)", "base": "LCF", "k": k, "l": l,
                         "admissible": ok, "detail": f"2k+l={2 * k + l}"})
    return rows
