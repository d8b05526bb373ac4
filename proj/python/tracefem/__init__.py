"""Adaptive trace finite elements for the Laplace-Beltrami problem on the unit sphere."""

from ._core import (
    CellId,
    CellTag,
    ConfigError,
    ConvergenceRecord,
    CutClassification,
    GeometryError,
    LevelSetField,
    ManufacturedCase,
    OctreeMesh,
    RefinementMode,
    RunConfig,
    SolveReport,
    SolverError,
    StabilizationConfig,
    StabilizationKind,
    SurfaceQuadrature,
    classify,
    csv_header,
    dorfler_mark,
    pcg,
    run,
)

__all__ = [
    "CellId",
    "CellTag",
    "ConfigError",
    "ConvergenceRecord",
    "CutClassification",
    "GeometryError",
    "LevelSetField",
    "ManufacturedCase",
    "OctreeMesh",
    "RefinementMode",
    "RunConfig",
    "SolveReport",
    "SolverError",
    "StabilizationConfig",
    "StabilizationKind",
    "SurfaceQuadrature",
    "classify",
    "csv_header",
    "dorfler_mark",
    "pcg",
    "run",
]
