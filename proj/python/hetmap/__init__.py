"""Task mapping on heterogeneous platforms.

Thin convenience wrappers over the native module: the native API speaks JSON
strings; these helpers move between JSON and Python dicts.
"""

import json
from typing import Any, Optional

from . import _core
from ._core import HetmapError

__all__ = [
    "HetmapError",
    "evaluate",
    "export_lp",
    "generate",
    "preset_platform",
    "render_dot",
    "render_gantt",
    "run_experiment",
    "solve",
    "validate_graph",
]


def generate(
    edges: int = 30,
    seed: int = 1,
    skeleton: bool = False,
    source_bytes: float = 100e6,
    load: float = 100e6,
) -> dict:
    """Generate a random task graph (expanded unless ``skeleton``)."""
    return json.loads(_core.generate(edges, seed, skeleton, source_bytes, load))


def validate_graph(graph: dict) -> list:
    """Structural violations of a graph dict; empty means well formed."""
    return _core.validate_graph(json.dumps(graph))


def preset_platform(name: str) -> dict:
    """One of the built-in platforms: CG, CGF, or CGFF."""
    return json.loads(_core.preset_platform(name))


def evaluate(
    graph: dict,
    platform: Any = "CG",
    mapping: Any = "all-cpu",
    bus_overlap: bool = False,
    streaming: bool = False,
    timing: Optional[dict] = None,
) -> dict:
    """Makespan and timeline of a mapping; returns the timeline dict."""
    return json.loads(
        _core.evaluate(
            json.dumps(graph),
            platform if isinstance(platform, str) else json.dumps(platform),
            mapping if isinstance(mapping, str) else json.dumps(mapping),
            bus_overlap,
            streaming,
            json.dumps(timing) if timing is not None else "",
        )
    )


def solve(
    graph: dict,
    platform: Any = "CG",
    formulation: str = "device",
    mode: str = "bnb",
    time_limit: float = 60.0,
    gap: float = 1e-6,
    node_limit: int = -1,
    enum_budget: int = 10_000_000,
    timing: Optional[dict] = None,
) -> dict:
    """Solve for a mapping; returns status, objective, and the mapping."""
    status, objective, mapping_json, nodes, note = _core.solve(
        json.dumps(graph),
        platform if isinstance(platform, str) else json.dumps(platform),
        formulation,
        mode,
        time_limit,
        gap,
        node_limit,
        enum_budget,
        json.dumps(timing) if timing is not None else "",
    )
    return {
        "status": status,
        "objective": objective,
        "mapping": json.loads(mapping_json) if mapping_json else None,
        "nodes_explored": nodes,
        "note": note,
    }


def export_lp(
    graph: dict,
    platform: Any = "CG",
    formulation: str = "device",
    timing: Optional[dict] = None,
) -> str:
    """The MILP for a graph/platform/formulation as LP-format text."""
    return _core.export_lp(
        json.dumps(graph),
        platform if isinstance(platform, str) else json.dumps(platform),
        formulation,
        json.dumps(timing) if timing is not None else "",
    )


def render_dot(graph: dict, mapping: Optional[dict] = None) -> str:
    """Graphviz DOT text for a graph, optionally colored by a mapping."""
    return _core.render_dot(
        json.dumps(graph), json.dumps(mapping) if mapping is not None else ""
    )


def render_gantt(timeline: dict) -> str:
    """SVG Gantt chart for a timeline dict (as returned by evaluate)."""
    return _core.render_gantt(json.dumps(timeline))


def run_experiment(config: dict) -> dict:
    """Run the strategy-comparison harness; returns the report dict."""
    report_json, _csv = _core.run_experiment(json.dumps(config))
    return json.loads(report_json)
