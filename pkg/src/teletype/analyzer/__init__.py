"""Miniature three-mode gradual type analyzer for a Lua-like language."""

from teletype.analyzer.checker import AnalysisBudget, AnalysisError, min_mode, visible_in
from teletype.analyzer.project import (
    DEFAULT_GLOBALS,
    ModuleSource,
    Project,
    ProjectResult,
    ProjectState,
    background_check,
    check_module,
    import_graph,
    importers_closure,
    load_project,
    mark_dirty,
    remove_cycles,
    save_project,
    topo_order,
)
from teletype.analyzer.syntax import ParseError, parse

__all__ = [
    "AnalysisBudget",
    "AnalysisError",
    "DEFAULT_GLOBALS",
    "ModuleSource",
    "ParseError",
    "Project",
    "ProjectResult",
    "ProjectState",
    "background_check",
    "check_module",
    "import_graph",
    "importers_closure",
    "load_project",
    "mark_dirty",
    "min_mode",
    "parse",
    "remove_cycles",
    "save_project",
    "topo_order",
    "visible_in",
]
