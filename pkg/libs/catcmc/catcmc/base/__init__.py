from .component import BaseComponent, Node, Param, lazy
from .schema import (
    BoundaryData,
    CylinderField,
    DiskField,
    FitResult,
    NeckParams,
    Signature,
    SolveReport,
    WeightedNormResult,
)

__all__ = [
    "BaseComponent",
    "Node",
    "Param",
    "lazy",
    "BoundaryData",
    "CylinderField",
    "DiskField",
    "FitResult",
    "NeckParams",
    "Signature",
    "SolveReport",
    "WeightedNormResult",
]
