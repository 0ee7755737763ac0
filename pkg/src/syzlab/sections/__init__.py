"""Graded section systems: the interface plus the four concrete backends."""
from .base import (V, CurveInfo, GradedSectionSystem, GradeOutOfRange, IndexOutOfRange,
                   ReductionFailure, SectionsError, UnsupportedPoint, ValidationReport,
                   multi_indices, validate_system)
from .elliptic import BASE_POINT, EllipticSystem
from .filesys import FileSystemAlgebra, FormatError, export_system
from .projline import INF, ProjLineSystem
from .toric import ToricSystem, box, dilate, minkowski, parse_points, simplex


def system_from_descriptor(desc: dict) -> GradedSectionSystem:
    """Rebuild a system from :meth:`GradedSectionSystem.descriptor` output."""
    kind = desc["system"]
    if kind == "projline":
        return ProjLineSystem(desc["b"], desc["d"])
    if kind == "elliptic":
        return EllipticSystem(desc["A"], desc["B"], desc["b"], desc["d"])
    if kind == "toric":
        return ToricSystem(desc["pb"], desc["pl"], family=desc.get("family"))
    if kind == "file":
        if not desc.get("source"):
            raise ValueError("file system descriptor has no source path")
        return FileSystemAlgebra.load(desc["source"])
    raise ValueError(f"unknown system kind {kind!r}")


__all__ = [
    "V", "INF", "BASE_POINT", "CurveInfo", "GradedSectionSystem", "GradeOutOfRange",
    "IndexOutOfRange", "ReductionFailure", "SectionsError", "UnsupportedPoint",
    "ValidationReport", "multi_indices", "validate_system", "EllipticSystem",
    "FileSystemAlgebra", "FormatError", "export_system", "ProjLineSystem", "ToricSystem",
    "box", "dilate", "minkowski", "parse_points", "simplex", "system_from_descriptor",
]
