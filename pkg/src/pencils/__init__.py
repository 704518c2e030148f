"""Pencils of curves built from exact discrete max flows on finite metric measure spaces."""
from .exceptions import (
    DecompositionError,
    GraphTooLargeError,
    InvalidInputError,
    NotAcyclicError,
    PencilError,
    RetainedMassError,
)
from .flow import Flow, max_flow, min_cut, validate_flow
from .generators import generate
from .netgraph import NetGraph, build_graph
from .pipeline import PipelineConfig, Report, run_pipeline, sweep_scales
from .space import Net, Space, build_net

__all__ = [
    "DecompositionError", "Flow", "GraphTooLargeError", "InvalidInputError", "Net",
    "NetGraph", "NotAcyclicError", "PencilError", "PipelineConfig", "Report",
    "RetainedMassError", "Space", "build_graph", "build_net", "generate", "max_flow",
    "min_cut", "run_pipeline", "sweep_scales", "validate_flow",
]
