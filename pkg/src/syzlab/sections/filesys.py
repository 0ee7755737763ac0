"""Section systems read from a structure-constant file.

The file is a JSON object with exactly these members::

    {
      "header": {"name": str, "dim_x": int, "m_min": int, "m_max": int,
                 "dims": [dim W_m for m in m_min..m_max], "dim_v": int,
                 "hcv": bool},
      "mult": [[m, v_index, w_index, out_index, numerator, denominator], ...],
      "jets": [[space, section_index, point_id, order_1..order_n, numerator, denominator], ...]
    }

``jets`` is optional.  ``space`` is ``"V"`` or an integer grade.  Products
not listed are zero; grades below ``m_min`` are empty, grades above
``m_max`` are unknown.  Jet tables are complete up to the largest total
order listed for a point (absent entries are zero); higher orders are
unsupported.  Unknown members and unreduced fractions are rejected.
"""
from __future__ import annotations

import hashlib
import json
import random
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .base import (GradedSectionSystem, GradeOutOfRange, IndexOutOfRange, Scalar, Space,
                   SparseVec, UnsupportedPoint, V, normalize_order)

HEADER_FIELDS = {"name", "dim_x", "m_min", "m_max", "dims", "dim_v", "hcv"}
TOP_FIELDS = {"header", "mult", "jets"}


class FormatError(ValueError):
    pass


def _fraction(num: Any, den: Any, where: str) -> Scalar:
    if not isinstance(num, int) or not isinstance(den, int) or isinstance(num, bool) or isinstance(den, bool):
        raise FormatError(f"{where}: numerator and denominator must be integers")
    reduced = den == 1 if num == 0 else den > 0 and gcd(num, den) == 1
    if not reduced:
        raise FormatError(f"{where}: fraction {num}/{den} is not reduced")
    return num if den == 1 else Fraction(num, den)


class FileSystemAlgebra(GradedSectionSystem):
    hypothesis_source = "asserted by input"

    def __init__(self, doc: Dict[str, Any], source: Optional[str] = None):
        super().__init__()
        if not isinstance(doc, dict):
            raise FormatError("top level must be an object")
        unknown = set(doc) - TOP_FIELDS
        if unknown:
            raise FormatError(f"unknown fields {sorted(unknown)}")
        if "header" not in doc or "mult" not in doc:
            raise FormatError("missing 'header' or 'mult'")
        head = doc["header"]
        if not isinstance(head, dict):
            raise FormatError("header must be an object")
        if set(head) != HEADER_FIELDS:
            extra = set(head) - HEADER_FIELDS
            missing = HEADER_FIELDS - set(head)
            raise FormatError(f"header fields: unknown {sorted(extra)}, missing {sorted(missing)}")
        self.name = str(head["name"])
        self.dim_x = int(head["dim_x"])
        self.m_min = int(head["m_min"])
        self.m_max = int(head["m_max"])
        dims = [int(x) for x in head["dims"]]
        if len(dims) != self.m_max - self.m_min + 1:
            raise FormatError("dims must list one entry per grade in [m_min, m_max]")
        if any(x < 0 for x in dims):
            raise FormatError("negative dimension in dims")
        self._dims = dims
        self._dim_v = int(head["dim_v"])
        if not isinstance(head["hcv"], bool):
            raise FormatError("hcv must be a boolean")
        self.higher_cohomology_vanishes = head["hcv"]
        self.source = source
        self.digest = hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()

        self._mult: Dict[Tuple[int, int, int], Dict[int, Scalar]] = {}
        for k, entry in enumerate(doc["mult"]):
            where = f"mult[{k}]"
            if not isinstance(entry, list) or len(entry) != 6:
                raise FormatError(f"{where}: expected 6 integers")
            m, v, w, out, num, den = entry
            if not self.m_min <= m < self.m_max:
                raise FormatError(f"{where}: grade {m} has no target grade in range")
            if not (0 <= v < self._dim_v and 0 <= w < self.dim_w(m) and 0 <= out < self.dim_w(m + 1)):
                raise FormatError(f"{where}: index out of range")
            val = _fraction(num, den, where)
            slot = self._mult.setdefault((m, v, w), {})
            if out in slot:
                raise FormatError(f"{where}: duplicate entry")
            if val:
                slot[out] = val

        self._jets: Dict[Tuple[Space, int, str, Tuple[int, ...]], Scalar] = {}
        self._jet_depth: Dict[str, int] = {}
        for k, entry in enumerate(doc.get("jets", [])):
            where = f"jets[{k}]"
            if not isinstance(entry, list) or len(entry) != 5 + self.dim_x:
                raise FormatError(f"{where}: expected {5 + self.dim_x} items")
            space, idx, pid = entry[0], entry[1], entry[2]
            order = tuple(entry[3:3 + self.dim_x])
            val = _fraction(entry[-2], entry[-1], where)
            if space != V and not isinstance(space, int):
                raise FormatError(f"{where}: space must be 'V' or a grade")
            if not 0 <= idx < self.space_dim(space):
                raise FormatError(f"{where}: section index out of range")
            pid = str(pid)
            self._jets[(space, idx, pid, order)] = val
            self._jet_depth[pid] = max(self._jet_depth.get(pid, 0), sum(order))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FileSystemAlgebra":
        text = Path(path).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from None
        sysm = cls(doc, source=str(path))
        sysm.digest = hashlib.sha256(text.encode()).hexdigest()
        return sysm

    @property
    def dim_v(self) -> int:
        return self._dim_v

    def dim_w(self, m: int) -> int:
        if m < self.m_min:
            return 0
        if m > self.m_max:
            raise GradeOutOfRange(f"grade {m} above m_max = {self.m_max}")
        return self._dims[m - self.m_min]

    def _multiply(self, v: int, m: int, w: int) -> SparseVec:
        if m >= self.m_max:
            raise GradeOutOfRange(f"product out of grade {m} needs grade {m + 1} > m_max")
        return dict(self._mult.get((m, v, w), {}))

    def jet_row(self, space: Space, index: int, point: Any, order) -> Scalar:
        alpha = normalize_order(order, self.dim_x)
        if not 0 <= index < self.space_dim(space):
            raise IndexOutOfRange(f"section {index} outside space {space}")
        pid = str(point)
        if pid not in self._jet_depth or sum(alpha) > self._jet_depth[pid]:
            raise UnsupportedPoint(f"no jet table for point {pid!r} at order {alpha}")
        return self._jets.get((space, index, pid, alpha), 0)

    def named_points(self) -> List[str]:
        return sorted(self._jet_depth)

    def descriptor(self) -> Dict[str, Any]:
        return {"system": "file", "name": self.name, "source": self.source, "sha256": self.digest}

    def parse_point(self, text: str) -> Any:
        pid = text.strip()
        if pid not in self._jet_depth:
            raise UnsupportedPoint(f"unknown point {pid!r}")
        return pid

    def random_point(self, rng: random.Random, box: int) -> Any:
        pts = self.named_points()
        if not pts:
            raise UnsupportedPoint("file declares no jet points")
        return rng.choice(pts)

    def default_grades(self) -> range:
        return range(max(self.m_min, 0), self.m_max - 1)


def export_system(sys: GradedSectionSystem, m_min: int = 0, m_max: int = 3, *,
                  name: Optional[str] = None, points: Sequence[Any] = (),
                  jet_order: int = 0, hcv: Optional[bool] = None) -> Dict[str, Any]:
    """Materialize any backend as a file document (grades m_min..m_max).

    Jets of W_0 and V sections are written for ``points`` up to total order
    ``jet_order``, with explicit zeros so the tables count as complete.
    """
    from .base import multi_indices

    dims = [sys.dim_w(m) for m in range(m_min, m_max + 1)]
    mult = []
    for m in range(m_min, m_max):
        for v in range(sys.dim_v):
            for w in range(sys.dim_w(m)):
                for out, c in sorted(sys._multiply(v, m, w).items()):
                    c = Fraction(c)
                    mult.append([m, v, w, out, c.numerator, c.denominator])
    jets = []
    for k, pt in enumerate(points):
        pid = sys.format_point(pt)
        for space in (V, 0):
            for idx in range(sys.space_dim(space)):
                for alpha in multi_indices(sys.dim_x, jet_order):
                    c = Fraction(sys.jet_row(space, idx, pt, alpha))
                    jets.append([space, idx, pid, *alpha, c.numerator, c.denominator])
    doc: Dict[str, Any] = {
        "header": {
            "name": name or json.dumps(sys.descriptor(), sort_keys=True),
            "dim_x": sys.dim_x, "m_min": m_min, "m_max": m_max, "dims": dims,
            "dim_v": sys.dim_v,
            "hcv": sys.higher_cohomology_vanishes if hcv is None else hcv,
        },
        "mult": mult,
    }
    if jets:
        doc["jets"] = jets
    return doc
