"""Projects, the import graph, and incremental whole-project analysis."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from teletype.analyzer import syntax as ast
from teletype.analyzer.checker import (
    REQUIRE_CYCLE,
    REQUIRE_DYNAMIC,
    REQUIRE_ILLEGAL,
    REQUIRE_OK,
    REQUIRE_UNKNOWN,
    AnalysisBudget,
    AnalysisError,
    CheckOutcome,
    ModuleChecker,
    TooComplex,
    visible_in,
)
from teletype.analyzer.types import DYNAMIC, Type, sealed_copy
from teletype.kinds import ErrorKind, Mode

DEFAULT_GLOBALS = frozenset(
    {
        "print", "warn", "error", "assert", "type", "typeof", "tostring", "tonumber",
        "pairs", "ipairs", "select", "next", "unpack", "math", "string", "table", "os",
        "task", "wait", "tick", "time", "workspace", "script", "Instance", "Vector3",
        "CFrame", "Color3", "Enum", "UDim2",
    }
)

MODULE_SUFFIX = ".luau"
DATA_MODEL_FILE = "data_model.txt"


@dataclass(frozen=True)
class ModuleSource:
    module_id: str
    lines: tuple = ()

    @classmethod
    def from_text(cls, module_id: str, text: str) -> "ModuleSource":
        return cls(module_id, tuple(text.split("\n")) if text else ())

    @property
    def text(self) -> str:
        return "\n".join(self.lines)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def pragma_mode(self) -> Mode:
        if self.lines:
            tag = ast.pragma_mode(self.lines[0])
            if tag is not None:
                return Mode(tag)
        return Mode.NOCHECK

    @property
    def imports(self) -> list[str]:
        parsed = parse_module(self)
        return [] if isinstance(parsed, ast.ParseError) else require_targets(parsed)


@dataclass
class Project:
    modules: dict = field(default_factory=dict)
    data_model: frozenset = frozenset()
    globals: frozenset = DEFAULT_GLOBALS

    @classmethod
    def from_sources(cls, sources: Mapping[str, str], data_model: Iterable[str] = (), **kw) -> "Project":
        modules = {mid: ModuleSource.from_text(mid, text) for mid, text in sources.items()}
        return cls(modules, frozenset(data_model), **kw)

    def module(self, module_id: str) -> ModuleSource:
        try:
            return self.modules[module_id]
        except KeyError:
            raise KeyError(f"unknown module {module_id!r}") from None

    @property
    def n_lines(self) -> int:
        return sum(m.n_lines for m in self.modules.values())

    def copy(self) -> "Project":
        return Project(dict(self.modules), self.data_model, self.globals)


def load_project(path: str | os.PathLike) -> Project:
    root = Path(path)
    sources = {}
    for file in sorted(root.glob("*" + MODULE_SUFFIX)):
        sources[file.name[: -len(MODULE_SUFFIX)]] = file.read_text(encoding="utf-8")
    data_model: list[str] = []
    dm = root / DATA_MODEL_FILE
    if dm.exists():
        data_model = [line.strip() for line in dm.read_text(encoding="utf-8").splitlines() if line.strip()]
    return Project.from_sources(sources, data_model)


def save_project(project: Project, path: str | os.PathLike) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for mid, mod in project.modules.items():
        (root / (mid + MODULE_SUFFIX)).write_text(mod.text, encoding="utf-8")
    (root / DATA_MODEL_FILE).write_text("".join(f"{a}\n" for a in sorted(project.data_model)), encoding="utf-8")


# -- parsing helpers -----------------------------------------------------------

_parse_cache: dict[str, object] = {}
_PARSE_CACHE_LIMIT = 4096


def parse_module(module: ModuleSource):
    """Return the module's Chunk, or the ParseError that stopped it. Memoized by text."""
    text = module.text
    hit = _parse_cache.get(text)
    if hit is not None:
        return hit
    try:
        result = ast.parse(text)
    except ast.ParseError as exc:
        result = exc
    if len(_parse_cache) >= _PARSE_CACHE_LIMIT:
        _parse_cache.clear()
    _parse_cache[text] = result
    return result


def require_targets(chunk: ast.Chunk) -> list[str]:
    """Literal module names passed to ``require`` anywhere in the chunk, in source order."""
    found: list[str] = []

    def walk(node):
        if isinstance(node, ast.Call):
            if isinstance(node.fn, ast.Name) and node.fn.name == "require":
                if len(node.args) == 1 and isinstance(node.args[0], ast.String):
                    found.append(node.args[0].value)
        if isinstance(node, ast.Node):
            for value in vars(node).values():
                walk(value)
        elif isinstance(node, (list, tuple)):
            for item in node:
                walk(item)

    walk(chunk.body)
    return found


# -- graph ------------------------------------------------------------------------


def import_graph(project: Project) -> dict[str, set[str]]:
    """importer -> set of importees that exist in the project."""
    graph = {}
    for mid in sorted(project.modules):
        targets = project.modules[mid].imports
        graph[mid] = {t for t in targets if t in project.modules}
    return graph


def find_cycle(graph: Mapping[str, Iterable[str]]) -> list[tuple[str, str]] | None:
    """First cycle found by DFS over sorted nodes and sorted successors, as a list of edges."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in graph}
    for root in sorted(graph):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(sorted(graph[root])))]
        path = [root]
        color[root] = GREY
        while stack:
            node, succ = stack[-1]
            nxt = next(succ, None)
            if nxt is None:
                color[node] = BLACK
                stack.pop()
                path.pop()
                continue
            if color.get(nxt, BLACK) == GREY:
                i = path.index(nxt)
                cyc = path[i:] + [nxt]
                return list(zip(cyc, cyc[1:]))
            if color.get(nxt) == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append((nxt, iter(sorted(graph[nxt]))))
    return None


def remove_cycles(graph: Mapping[str, Iterable[str]]) -> tuple[dict[str, set[str]], list[tuple[str, str]]]:
    """Break every cycle by dropping its lexicographically greatest (importer, importee) edge."""
    g = {n: set(s) for n, s in graph.items()}
    removed = []
    while True:
        cycle = find_cycle(g)
        if cycle is None:
            return g, removed
        edge = max(cycle)
        g[edge[0]].discard(edge[1])
        removed.append(edge)


def importers_closure(graph: Mapping[str, Iterable[str]], module_id: str) -> set[str]:
    """``module_id`` plus every module that transitively imports it."""
    reverse: dict[str, set[str]] = {}
    for src, dsts in graph.items():
        for dst in dsts:
            reverse.setdefault(dst, set()).add(src)
    seen = {module_id}
    todo = [module_id]
    while todo:
        node = todo.pop()
        for src in reverse.get(node, ()):
            if src not in seen:
                seen.add(src)
                todo.append(src)
    return seen


def topo_order(graph: Mapping[str, Iterable[str]]) -> list[str]:
    """Importees before importers; ties broken by module id. Graph must be acyclic."""
    indeg = {n: 0 for n in graph}
    users: dict[str, list[str]] = {n: [] for n in graph}
    for src, dsts in graph.items():
        for dst in dsts:
            indeg[src] += 1
            users[dst].append(src)
    import heapq

    ready = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        n = heapq.heappop(ready)
        out.append(n)
        for u in users[n]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(out) != len(indeg):
        raise ValueError("graph has a cycle")
    return out


# -- analysis ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExportInfo:
    status: str
    type: Type | None = None


@dataclass
class ModuleAnalysis:
    """Everything cached for one module between invocations."""

    mode: Mode
    n_lines: int
    syntax_error: AnalysisError | None
    visible_all: tuple  # unfiltered diagnostics of the visible-environment pass
    background: tuple
    visible_export: ExportInfo
    background_export: ExportInfo
    too_complex: bool = False
    background_too_complex: bool = False
    separate_background: bool = False

    def errors(self, mode: Mode | None = None) -> tuple:
        """Visible errors under ``mode`` (default: the module's own pragma)."""
        mode = mode or self.mode
        if self.syntax_error is not None:
            return (self.syntax_error,)
        return tuple(e for e in self.visible_all if visible_in(e, mode))


@dataclass(frozen=True)
class ProjectResult:
    visible: dict
    background: dict
    modes: dict
    removed_edges: tuple
    analyzed: frozenset = frozenset()

    def all_visible(self) -> list:
        return [e for mid in sorted(self.visible) for e in self.visible[mid]]

    def all_background(self) -> list:
        return [e for mid in sorted(self.background) for e in self.background[mid]]


def _too_complex_error(module_id: str, n_lines: int) -> AnalysisError:
    return AnalysisError(
        ErrorKind.CodeTooComplex,
        module_id,
        1,
        max(1, n_lines),
        message="Code is too complex to typecheck! Consider simplifying the code around this area",
    )


class ProjectState:
    """Mutable project plus per-module result cache.

    Edits mark the edited module dirty; :meth:`analyze` re-checks exactly the
    dirty modules and their transitive importers and serves everything else
    from cache.
    """

    def __init__(self, project: Project, budget: AnalysisBudget | None = None):
        self.project = project.copy()
        self.budget = budget or AnalysisBudget()
        self._cache: dict[str, ModuleAnalysis] = {}
        self._graph = import_graph(self.project)
        self._removed: list[tuple[str, str]] = []
        self._dirty: set[str] = set(self.project.modules)
        self.last_result: ProjectResult | None = None

    @property
    def dirty(self) -> frozenset:
        return frozenset(self._dirty)

    def mark_dirty(self, module_id: str) -> set[str]:
        if module_id not in self.project.modules:
            raise KeyError(f"unknown module {module_id!r}")
        closure = importers_closure(self._graph, module_id)
        self._dirty |= closure
        return closure

    def update_module(self, module_id: str, lines: Iterable[str]) -> set[str]:
        """Replace a module's text and mark it (and its importers) dirty."""
        if module_id not in self.project.modules:
            raise KeyError(f"unknown module {module_id!r}")
        before = importers_closure(self._graph, module_id)
        self.project.modules[module_id] = ModuleSource(module_id, tuple(lines))
        self._graph = import_graph(self.project)
        closure = importers_closure(self._graph, module_id) | before
        self._dirty |= closure
        return closure

    def analyze(self) -> ProjectResult:
        graph = self._graph
        acyclic, removed = remove_cycles(graph)
        if removed != self._removed:
            # a changed cycle break can touch importers outside the dirty closure
            for edge in set(removed) ^ set(self._removed):
                if edge[0] in self.project.modules:
                    self._dirty |= importers_closure(graph, edge[0])
            self._removed = removed
        removed_set = set(removed)
        dirty = self._dirty
        for mid in topo_order(acyclic):
            if mid in dirty or mid not in self._cache:
                self._cache[mid] = self._check(mid, acyclic, removed_set)
        analyzed = frozenset(dirty)
        self._dirty = set()
        result = ProjectResult(
            visible={mid: a.errors() for mid, a in sorted(self._cache.items())},
            background={mid: a.background for mid, a in sorted(self._cache.items())},
            modes={mid: a.mode for mid, a in sorted(self._cache.items())},
            removed_edges=tuple(removed),
            analyzed=analyzed,
        )
        self.last_result = result
        return result

    def module_analysis(self, module_id: str) -> ModuleAnalysis:
        if self._dirty or module_id not in self._cache:
            self.analyze()
        return self._cache[module_id]

    def _resolver(self, module_id: str, removed: set, background: bool):
        modules = self.project.modules

        def resolve(target: str):
            if target not in modules:
                return REQUIRE_UNKNOWN, None
            if (module_id, target) in removed:
                return REQUIRE_CYCLE, None
            dep = self._cache.get(target)
            if dep is None:
                return REQUIRE_DYNAMIC, None
            if background:
                info = dep.background_export
            else:
                if dep.mode is Mode.NOCHECK:
                    return REQUIRE_DYNAMIC, None
                info = dep.visible_export
            if info.status == REQUIRE_OK:
                return REQUIRE_OK, sealed_copy(info.type)
            return info.status, None

        return resolve

    def _run(self, module_id: str, chunk, removed: set, background: bool):
        checker = ModuleChecker(
            module_id,
            chunk,
            self._resolver(module_id, removed, background),
            self.budget,
            self.project.globals,
        )
        try:
            return checker.run()
        except TooComplex:
            return None

    @staticmethod
    def _export(outcome: CheckOutcome | None) -> ExportInfo:
        if outcome is None:
            return ExportInfo(REQUIRE_DYNAMIC)
        if not outcome.has_return:
            return ExportInfo(REQUIRE_ILLEGAL)
        return ExportInfo(REQUIRE_OK, sealed_copy(outcome.export))

    def _needs_separate_background(self, module_id: str, acyclic) -> bool:
        for dep in acyclic.get(module_id, ()):
            cached = self._cache.get(dep)
            if cached is not None and cached.mode is Mode.NOCHECK:
                return True
            if cached is not None and cached.separate_background:
                return True
        return False

    def _check(self, module_id: str, acyclic, removed: set) -> ModuleAnalysis:
        module = self.project.modules[module_id]
        mode = module.pragma_mode
        parsed = parse_module(module)
        if isinstance(parsed, ast.ParseError):
            err = AnalysisError(
                ErrorKind.SyntaxError,
                module_id,
                max(1, parsed.line),
                max(1, parsed.line),
                message=parsed.message,
            )
            dyn = ExportInfo(REQUIRE_DYNAMIC)
            return ModuleAnalysis(mode, module.n_lines, err, (), (err,), dyn, dyn)

        visible = self._run(module_id, parsed, removed, background=False)
        separate = self._needs_separate_background(module_id, acyclic)
        if separate:
            background = self._run(module_id, parsed, removed, background=True)
        else:
            background = visible

        if visible is None:
            visible_all = (_too_complex_error(module_id, module.n_lines),)
        else:
            visible_all = tuple(visible.errors)
        if background is None:
            bg_errors = (_too_complex_error(module_id, module.n_lines),)
        else:
            bg_errors = tuple(e for e in background.errors if visible_in(e, Mode.STRICT) and not e.data_model)
        return ModuleAnalysis(
            mode=mode,
            n_lines=module.n_lines,
            syntax_error=None,
            visible_all=visible_all,
            background=bg_errors,
            visible_export=self._export(visible),
            background_export=self._export(background),
            too_complex=visible is None,
            background_too_complex=background is None,
            separate_background=separate,
        )


# -- functional API ---------------------------------------------------------------------


def check_module(
    project: Project,
    module_id: str,
    mode: Mode | str | None = None,
    budget: AnalysisBudget | None = None,
) -> list[AnalysisError]:
    """Errors the visible analysis reports for one module under ``mode``.

    ``mode`` defaults to the module's own pragma. Imports are analyzed under
    their own pragmas, exactly as the editor would.
    """
    state = ProjectState(project, budget)
    analysis = state.module_analysis(module_id)
    if isinstance(mode, str):
        mode = Mode(mode)
    return list(analysis.errors(mode))


def background_check(project: Project, budget: AnalysisBudget | None = None) -> dict[str, list[AnalysisError]]:
    """Forced-strict analysis of every module, with the data model typed dynamically."""
    result = ProjectState(project, budget).analyze()
    return {mid: list(errs) for mid, errs in result.background.items()}


def mark_dirty(state: ProjectState, module_id: str) -> set[str]:
    return state.mark_dirty(module_id)
