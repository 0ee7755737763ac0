"""Sweeps over d, onset detection and the curve-level consistency scans.

Nothing here extrapolates: a sweep reports what it saw on the tested window,
and an eventual pattern is "constant from d0 through the last tested d".
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .exact_linalg import FieldSpec, LinalgError
from .jets import SearchResult, search_violating_cycle
from .kernel_criterion import HypothesisNotAsserted, tensor_m_h1
from .koszul import DEFAULT_BUDGET, KoszulError, betti_table, duality_pair, kpq_dim, retwist
from .sections import (EllipticSystem, GradedSectionSystem, ProjLineSystem, SectionsError,
                       ToricSystem)

FAMILIES = ("projline", "elliptic", "toric")
QUANTITIES = ("kp1", "mh1", "jets")
VANISHING, NONVANISHING = "VANISHING", "NONVANISHING"
MATCH, MISMATCH, INCONCLUSIVE = "MATCH", "MISMATCH", "INCONCLUSIVE"
MIN_TAIL = 2


@dataclass(frozen=True)
class SweepSpec:
    """A family L_d with fixed B, a syzygy index p and a window of d."""

    family: str
    p: int
    d_values: Tuple[int, ...]
    params: Dict[str, Any] = field(default_factory=dict)
    field: FieldSpec = field(default_factory=FieldSpec.rational)
    quantities: Tuple[str, ...] = ("kp1", "mh1", "jets")
    seed: int = 0
    jet_budget: int = 2000
    budget: Optional[int] = DEFAULT_BUDGET

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if not self.d_values:
            raise ValueError("empty d-range")
        if any(b <= a for a, b in zip(self.d_values, self.d_values[1:])):
            raise ValueError("d-range must be increasing")
        if self.p < 0:
            raise ValueError("p must be >= 0")
        bad = set(self.quantities) - set(QUANTITIES)
        if bad:
            raise ValueError(f"unknown quantities {sorted(bad)}")

    def system(self, d: int) -> GradedSectionSystem:
        prm = self.params
        if self.family == "projline":
            return ProjLineSystem(prm.get("b", 0), d)
        if self.family == "elliptic":
            return EllipticSystem(prm.get("A", 0), prm.get("B", 1), prm.get("b", 0), d)
        return ToricSystem.from_family(prm["pb"], prm["pa"], d, prm.get("pp"))

    def to_dict(self) -> Dict[str, Any]:
        params = {k: (str(v) if k in ("A", "B") else v) for k, v in sorted(self.params.items())}
        return {"family": self.family, "p": self.p, "d_values": list(self.d_values), "params": params,
                "field": self.field.describe(), "quantities": list(self.quantities),
                "seed": self.seed, "jet_budget": self.jet_budget}


@dataclass
class SweepRecord:
    d: int
    r_d: Optional[int] = None
    kp1: Optional[int] = None
    mh1: Optional[int] = None
    notes: List[str] = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self, timings: bool = False) -> Dict[str, Any]:
        out = {"d": self.d, "r_d": self.r_d, "kp1": self.kp1, "mh1": self.mh1, "notes": list(self.notes)}
        if timings:
            out["seconds"] = round(self.seconds, 6)
        return out


@dataclass
class SweepReport:
    spec: SweepSpec
    records: List[SweepRecord]
    jets: Optional[SearchResult]
    jets_dict: Optional[Dict[str, Any]]
    prediction: Optional[str]
    onset: Optional[int]
    pattern: Optional[str]
    status: str
    interpretation: Optional[str] = None

    def to_dict(self, timings: bool = False) -> Dict[str, Any]:
        return {
            "kind": "sweep",
            "spec": self.spec.to_dict(),
            "records": [r.to_dict(timings) for r in self.records],
            "jets": self.jets_dict,
            "prediction": self.prediction,
            "onset": self.onset,
            "pattern": self.pattern,
            "status": self.status,
            "interpretation": self.interpretation,
        }

    def to_text(self, timings: bool = False) -> str:
        spec = self.spec
        lines = [f"sweep {spec.family} {_params_text(spec.params)} p={spec.p} "
                 f"d={spec.d_values[0]}..{spec.d_values[-1]} field={spec.field.describe()} seed={spec.seed}"]
        if self.jets_dict is not None:
            j = self.jets_dict
            cert = "certified" if j["certified"] else "not certified"
            lines.append(f"jets: {j['verdict']} ({cert}, {j['method']})"
                         + (f" cycle {j['cycle']}" if j["cycle"] else ""))
        lines.append(f"prediction: K_{{{spec.p},1}} {self.prediction or 'none'} for large d")
        header = f"{'d':>4} {'r_d':>5} {'K_p1':>8} {'mh1':>8}" + ("  seconds" if timings else "")
        lines.append(header)
        for r in self.records:
            row = f"{r.d:>4} {_show(r.r_d):>5} {_show(r.kp1):>8} {_show(r.mh1):>8}"
            if timings:
                row += f"  {r.seconds:7.3f}"
            if r.notes:
                row += "  # " + "; ".join(r.notes)
            lines.append(row)
        if self.onset is None:
            lines.append("observed: no constant tail in the tested window")
        else:
            lines.append(f"observed: K_{{{spec.p},1}} {self.pattern} for all tested d >= {self.onset}")
        lines.append(f"status: {self.status}")
        if self.interpretation:
            lines.append(self.interpretation)
        return "\n".join(lines) + "\n"


def _show(x: Optional[int]) -> str:
    return "-" if x is None else str(x)


def _params_text(params: Dict[str, Any]) -> str:
    return " ".join(f"{k}={v}" for k, v in sorted(params.items()))


def detect_onset(values: Sequence[Optional[int]], d_values: Sequence[int],
                 min_tail: int = MIN_TAIL) -> Tuple[Optional[int], Optional[str]]:
    """Least tested d from which "value == 0" is constant to the end of the window.

    Unknown values (None) break the tail.  A tail shorter than ``min_tail``
    gives (None, None).
    """
    if not values or values[-1] is None:
        return None, None
    last = values[-1] == 0
    start = len(values) - 1
    while start > 0 and values[start - 1] is not None and (values[start - 1] == 0) == last:
        start -= 1
    if len(values) - start < min_tail:
        return None, None
    return d_values[start], VANISHING if last else NONVANISHING


def prediction_from_jets(res: Optional[SearchResult]) -> Optional[str]:
    if res is None or not res.certified:
        return None
    if res.jet_very_ample is None:
        return None
    return VANISHING if res.jet_very_ample else NONVANISHING


def gonality_text(sys: GradedSectionSystem) -> Optional[str]:
    if not isinstance(sys, (ProjLineSystem, EllipticSystem)):
        return None
    c = sys.curve.gonality
    return (f"gonality {c}: for d large, K_{{r_d-k,1}}(X; L_d) is nonzero exactly when "
            f"X has a map of degree <= k to P^1, i.e. for k >= {c}")


def _record(spec: SweepSpec, d: int) -> SweepRecord:
    t0 = time.perf_counter()
    rec = SweepRecord(d)
    try:
        sys = spec.system(d)
        rec.r_d = sys.dim_v - 1
        if "kp1" in spec.quantities:
            rec.kp1 = kpq_dim(sys, spec.p, 1, spec.field, spec.budget)
        if "mh1" in spec.quantities:
            try:
                rec.mh1 = tensor_m_h1(sys, spec.p, spec.field, spec.budget)
            except HypothesisNotAsserted:
                rec.notes.append("mh1 skipped: higher cohomology not asserted to vanish")
    except (KoszulError, SectionsError, LinalgError, ValueError) as exc:
        rec.notes.append(f"{type(exc).__name__}: {exc}")
    rec.seconds = time.perf_counter() - t0
    return rec


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepReport:
    if jobs > 1 and len(spec.d_values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_record, [spec] * len(spec.d_values), spec.d_values))
    else:
        records = [_record(spec, d) for d in spec.d_values]

    jets = jets_dict = None
    first = spec.system(spec.d_values[0])
    if "jets" in spec.quantities:
        jets = search_violating_cycle(first, spec.p, budget=spec.jet_budget, seed=spec.seed)
        jets_dict = jets.to_dict(first)
    prediction = prediction_from_jets(jets)
    onset, pattern = (detect_onset([r.kp1 for r in records], spec.d_values)
                      if "kp1" in spec.quantities else (None, None))
    if prediction is None or pattern is None:
        status = INCONCLUSIVE
    else:
        status = MATCH if prediction == pattern else MISMATCH
    return SweepReport(spec, records, jets, jets_dict, prediction, onset, pattern, status,
                       gonality_text(first))


# ---------------------------------------------------------------------------


@dataclass
class RegularityReport:
    system: Dict[str, Any]
    p_max: int
    q_max: int
    h0_b: int
    table: List[List[Optional[int]]]
    high_rows: List[str] = field(default_factory=list)
    row0: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def deviations(self) -> List[str]:
        return self.errors + self.high_rows + self.row0

    @property
    def ok(self) -> bool:
        return not self.deviations

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "regularity", "system": self.system, "p_max": self.p_max, "q_max": self.q_max,
                "h0_b": self.h0_b, "table": self.table, "deviations": self.deviations, "ok": self.ok}


def regularity_scan(sys: GradedSectionSystem, p_max: int, f: Optional[FieldSpec] = None,
                    budget: Optional[int] = DEFAULT_BUDGET, jobs: int = 1) -> RegularityReport:
    """Check K_{p,q} = 0 for q >= dim X + 2 and K_{p,0} != 0 exactly for p < h^0(B).

    Both are large-d statements; run it at the largest affordable d.  Rows
    q = 0 .. dim X + 2 are computed for p <= p_max.
    """
    q_max = sys.dim_x + 2
    bt = betti_table(sys, p_max, q_max, f or FieldSpec.rational(), jobs=jobs, budget=budget)
    h0 = sys.dim_w(0)
    table = [[bt.cells[(p, q)].dim for p in range(p_max + 1)] for q in range(q_max + 1)]
    rep = RegularityReport(sys.descriptor(), p_max, q_max, h0, table)
    rep.errors = [f"K_{p},{q} not computed: {err}" for (p, q), err in sorted(bt.errors.items())]
    for p in range(p_max + 1):
        c = bt.cells[(p, 0)]
        if c.dim is not None and (c.dim != 0) != (p <= h0 - 1):
            rep.row0.append(f"K_{p},0 = {c.dim} but h0(B) - 1 = {h0 - 1}")
        for q in range(sys.dim_x + 2, q_max + 1):
            c = bt.cells[(p, q)]
            if c.dim:
                rep.high_rows.append(f"K_{p},{q} = {c.dim} (expected 0 for q >= {sys.dim_x + 2})")
    return rep


@dataclass
class DualityReport:
    curve: Dict[str, Any]
    p: int
    rows: List[Dict[str, Any]]

    @property
    def ok(self) -> bool:
        return all(r["equal"] for r in self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "duality", "curve": self.curve, "p": self.p, "rows": self.rows, "ok": self.ok}


def canonical_duality_check(curve: GradedSectionSystem, p: int, d_values: Sequence[int],
                            f: Optional[FieldSpec] = None) -> DualityReport:
    """dim K_{p,1}(X, K_X; L_d) against dim K_{r_d-1-p,1}(X; L_d) for each d."""
    rows = []
    for d in d_values:
        left, right = duality_pair(curve, p, d, f or FieldSpec.rational())
        rows.append({"d": d, "r_d": retwist(curve, 0, d).dim_v - 1, "with_canonical": left, "dual": right,
                     "equal": left == right})
    desc = {k: v for k, v in curve.descriptor().items() if k not in ("b", "d")}
    return DualityReport(desc, p, rows)

