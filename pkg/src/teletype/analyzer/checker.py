"""Single-module type inference and error reporting.

One checker pass infers types and records every diagnostic together with
the weakest mode that reports it. Mode filtering happens afterwards, so
the nocheck, nonstrict and strict views of a module are nested by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from teletype.analyzer import syntax as ast
from teletype.analyzer.types import (
    BOOLEAN,
    DYNAMIC,
    NIL,
    NUMBER,
    STRING,
    TOP,
    FunctionType,
    Optional,
    Prim,
    TableType,
    Type,
    join,
    optional,
)
from teletype.kinds import ErrorKind, Mode

DEFAULT_MAX_STEPS = 200_000


@dataclass(frozen=True)
class AnalysisBudget:
    """Upper bound on checker work units per module.

    One unit is charged per AST node visited and one per type equation
    (join, field lookup, arity or operand check).
    """

    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class AnalysisError:
    kind: ErrorKind
    module_id: str
    start_line: int
    end_line: int
    data_model: bool = field(default=False, compare=False)
    message: str = field(default="", compare=False)

    def __post_init__(self):
        if not 1 <= self.start_line <= self.end_line:
            raise ValueError(f"bad span {self.start_line}..{self.end_line}")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start_line, self.end_line)

    def sort_key(self):
        return (self.module_id, self.start_line, self.end_line, self.kind.value, self.message)


NONSTRICT_KINDS = frozenset(
    {
        ErrorKind.UnknownSymbol,
        ErrorKind.UnknownProperty,
        ErrorKind.UnknownPropButFoundLikeProp,
        ErrorKind.UnknownRequire,
        ErrorKind.CountMismatch,
        ErrorKind.CannotCallNonFunction,
        ErrorKind.NotATable,
        ErrorKind.IllegalRequire,
        ErrorKind.CodeTooComplex,
    }
)


def min_mode(kind: ErrorKind) -> Mode:
    if kind is ErrorKind.SyntaxError:
        return Mode.NOCHECK
    if kind in NONSTRICT_KINDS:
        return Mode.NONSTRICT
    return Mode.STRICT


def visible_in(err: AnalysisError, mode: Mode) -> bool:
    return min_mode(err.kind).rank <= mode.rank


# require() resolution results handed in by the project layer
REQUIRE_OK = "ok"
REQUIRE_UNKNOWN = "unknown"
REQUIRE_CYCLE = "cycle"
REQUIRE_ILLEGAL = "illegal"
REQUIRE_DYNAMIC = "dynamic"

RequireResolver = Callable[[str], "tuple[str, Type | None]"]


class TooComplex(Exception):
    pass


class Scope:
    __slots__ = ("parent", "vars")

    def __init__(self, parent: "Scope | None" = None, vars: dict | None = None):
        self.parent = parent
        self.vars = vars if vars is not None else {}

    def find(self, name: str) -> "Scope | None":
        scope = self
        while scope is not None:
            if name in scope.vars:
                return scope
            scope = scope.parent
        return None

    def snapshot(self) -> "Scope":
        return Scope(self.parent, dict(self.vars))


@dataclass
class CheckOutcome:
    errors: list  # AnalysisError, unfiltered
    has_return: bool
    export: Type
    steps: int


def _always_returns(block) -> bool:
    for stmt in block:
        if isinstance(stmt, ast.Return):
            return True
        if isinstance(stmt, ast.If) and stmt.orelse is not None:
            if all(_always_returns(b) for _, b in stmt.branches) and _always_returns(stmt.orelse):
                return True
    return False


class ModuleChecker:
    def __init__(
        self,
        module_id: str,
        chunk: ast.Chunk,
        resolve_require: RequireResolver,
        budget: AnalysisBudget,
        ambient: frozenset,
    ):
        self.module_id = module_id
        self.chunk = chunk
        self.resolve_require = resolve_require
        self.max_steps = budget.max_steps
        self.ambient = ambient
        self.steps = 0
        self.errors: list[AnalysisError] = []
        self.module_scope = Scope()
        self._pending: list[list] = []
        self._returns: list[list] = []
        self._cycle_reported: set[str] = set()

    # bookkeeping
    def tick(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > self.max_steps:
            raise TooComplex()

    def report(self, kind: ErrorKind, node: ast.Node, message: str, data_model: bool = False) -> None:
        self.errors.append(
            AnalysisError(kind, self.module_id, node.line, max(node.line, node.end_line), data_model, message)
        )

    def run(self) -> CheckOutcome:
        self._returns.append([])
        self.block(self.chunk.body, self.module_scope)
        top_returns = self._returns.pop()
        has_return = any(isinstance(s, ast.Return) for s in self.chunk.body)
        export = top_returns[0] if top_returns else NIL
        self.errors.sort(key=AnalysisError.sort_key)
        return CheckOutcome(self.errors, has_return, export, self.steps)

    # statements
    def block(self, stmts, scope: Scope) -> None:
        pending: list[FunctionType] = []
        self._pending.append(pending)
        for stmt in stmts:
            self.stmt(stmt, scope)
        self._pending.pop()
        for fn in pending:
            fn.return_type()

    def stmt(self, s, scope: Scope) -> None:
        self.tick()
        if isinstance(s, ast.Local):
            types = [self.expr(e, scope) for e in s.exprs]
            for i, name in enumerate(s.names):
                if i < len(types):
                    t = types[i]
                else:
                    t = DYNAMIC if s.exprs else NIL
                if isinstance(t, TableType) and t.label == "table":
                    t.label = name
                scope.vars[name] = t
        elif isinstance(s, ast.LocalFunction):
            fn = FunctionType(len(s.func.params))
            scope.vars[s.name] = fn
            self._defer(fn, s.func, scope)
        elif isinstance(s, ast.FunctionDecl):
            fn = FunctionType(len(s.func.params))
            self._defer(fn, s.func, scope)
            self.assign(s.target, fn, s, scope)
        elif isinstance(s, ast.Assign):
            types = [self.expr(e, scope) for e in s.exprs]
            for i, target in enumerate(s.targets):
                self.assign(target, types[i] if i < len(types) else NIL, target, scope)
        elif isinstance(s, ast.CallStmt):
            self.expr(s.call, scope)
        elif isinstance(s, ast.If):
            for cond, body in s.branches:
                self.expr(cond, scope)
                self.block(body, Scope(scope))
            if s.orelse is not None:
                self.block(s.orelse, Scope(scope))
        elif isinstance(s, ast.While):
            self.expr(s.cond, scope)
            self.block(s.body, Scope(scope))
        elif isinstance(s, ast.Return):
            types = [self.expr(e, scope) for e in s.exprs]
            self._returns[-1].append(types[0] if types else NIL)
        else:  # pragma: no cover - parser produces nothing else
            raise TypeError(f"unknown statement {s!r}")

    def _defer(self, fn: FunctionType, func: ast.FunctionExpr, scope: Scope) -> None:
        snap = scope.snapshot()
        fn.resolve = lambda: self.function_body(func, snap)
        self._pending[-1].append(fn)

    def function_body(self, func: ast.FunctionExpr, scope: Scope) -> Type:
        inner = Scope(scope, {p: DYNAMIC for p in func.params})
        self._returns.append([])
        self.block(func.body, inner)
        returns = self._returns.pop()
        result = NIL
        for i, t in enumerate(returns):
            self.tick()
            result = t if i == 0 else join(result, t)
        if returns and not _always_returns(func.body):
            self.tick()
            header = ast.Nil(func.line, func.line)
            self.report(
                ErrorKind.FunctionExitsWithoutReturning,
                header,
                f"Not all codepaths in '{func.name}' return a value",
            )
            result = optional(result)
        return result

    # assignment
    def assign(self, target, value: Type, node, scope: Scope) -> None:
        if isinstance(target, ast.Name):
            owner = scope.find(target.name)
            if owner is None:
                if target.name in self.ambient or target.name == "game":
                    return
                # Lua semantics: assignment to an unbound name creates a global
                self.module_scope.vars[target.name] = value
                return
            owner.vars[target.name] = self.reassign(owner.vars[target.name], value, node, target.name)
            return
        self.field_write(target, value, node, scope)

    def reassign(self, old: Type, new: Type, node, label: str) -> Type:
        self.tick()
        if old is DYNAMIC or old is NIL:
            return join(old, new)
        if isinstance(old, Optional):
            if new is NIL or new is DYNAMIC:
                return old
            if isinstance(old.inner, Prim) and isinstance(new, Prim) and new is not old.inner:
                self.report(
                    ErrorKind.TypeMismatch,
                    node,
                    f"Type '{new.describe()}' could not be converted into '{old.describe()}'",
                )
                return old
            return join(old, new)
        if isinstance(old, TableType) and isinstance(new, TableType) and old is not new:
            missing = sorted(k for k in old.fields if k not in new.fields)
            if missing and not new.sealed:
                self.report(
                    ErrorKind.MissingProperties,
                    node,
                    f"Table type '{label}' missing field(s) " + ", ".join(missing),
                )
            return old
        if isinstance(old, Prim) and isinstance(new, Prim) and old is not new:
            self.report(
                ErrorKind.TypeMismatch,
                node,
                f"Type '{new.describe()}' could not be converted into '{old.describe()}'",
            )
        return old

    def field_write(self, target: ast.Field, value: Type, node, scope: Scope) -> None:
        obj_t = self.expr(target.obj, scope)
        self.tick()
        if obj_t is DYNAMIC:
            return
        if obj_t is TOP:
            self.report(ErrorKind.TypeMismatch, target, "Type 'unknown' must be cast before use", True)
            return
        if isinstance(obj_t, Optional):
            self.report(
                ErrorKind.OptionalValueAccess, target.obj, f"Value of type '{obj_t.describe()}' could be nil"
            )
            obj_t = obj_t.inner
        if isinstance(obj_t, TableType):
            name = target.name
            if name in obj_t.fields:
                updated = self.reassign(obj_t.fields[name], value, node, name)
                if not obj_t.sealed:
                    obj_t.fields[name] = updated
            elif obj_t.sealed:
                self.report(
                    ErrorKind.CannotExtendTable,
                    target,
                    f"Cannot add property '{name}' to table '{obj_t.label}'",
                )
            else:
                if isinstance(value, TableType) and value.label == "table":
                    value.label = name
                obj_t.fields[name] = value
            return
        self.report(ErrorKind.NotATable, target.obj, f"Expected type table, got '{obj_t.describe()}' instead")

    # expressions
    def expr(self, e, scope: Scope) -> Type:
        self.tick()
        if isinstance(e, ast.Name):
            return self.name(e, scope)
        if isinstance(e, ast.Field):
            return self.field_read(e, scope)
        if isinstance(e, ast.Call):
            return self.call(e, scope)
        if isinstance(e, ast.Binary):
            return self.binary(e, scope)
        if isinstance(e, ast.Number):
            return NUMBER
        if isinstance(e, ast.String):
            return STRING
        if isinstance(e, ast.Bool):
            return BOOLEAN
        if isinstance(e, ast.Nil):
            return NIL
        if isinstance(e, ast.TableLit):
            fields = {}
            for key, value in e.fields:
                fields[key] = self.expr(value, scope)
            for item in e.items:
                self.expr(item, scope)
            return TableType(fields)
        if isinstance(e, ast.FunctionExpr):
            fn = FunctionType(len(e.params))
            self._defer(fn, e, scope)
            return fn
        if isinstance(e, ast.Unary):
            return self.unary(e, scope)
        if isinstance(e, ast.Cast):
            return self.cast(e, scope)
        raise TypeError(f"unknown expression {e!r}")  # pragma: no cover

    def name(self, e: ast.Name, scope: Scope) -> Type:
        owner = scope.find(e.name)
        if owner is not None:
            return owner.vars[e.name]
        if e.name == "game":
            return TOP
        if e.name in self.ambient or e.name == "require":
            return DYNAMIC
        self.report(ErrorKind.UnknownSymbol, e, f"Unknown global '{e.name}'")
        return DYNAMIC

    def _strip_optional(self, t: Type, node) -> Type:
        if isinstance(t, Optional):
            self.report(ErrorKind.OptionalValueAccess, node, f"Value of type '{t.describe()}' could be nil")
            return t.inner
        return t

    def field_read(self, e: ast.Field, scope: Scope) -> Type:
        obj_t = self.expr(e.obj, scope)
        self.tick()
        if obj_t is DYNAMIC:
            return DYNAMIC
        if obj_t is TOP:
            self.report(ErrorKind.TypeMismatch, e, "Type 'unknown' must be cast before indexing", True)
            return DYNAMIC
        obj_t = self._strip_optional(obj_t, e.obj)
        if isinstance(obj_t, TableType):
            if e.name in obj_t.fields:
                return obj_t.fields[e.name]
            lowered = e.name.lower()
            like = [k for k in obj_t.fields if k.lower() == lowered]
            if like:
                self.report(
                    ErrorKind.UnknownPropButFoundLikeProp,
                    e,
                    f"Key '{e.name}' not found in table '{obj_t.label}'. Did you mean '{like[0]}'?",
                )
            else:
                self.report(ErrorKind.UnknownProperty, e, f"Key '{e.name}' not found in table '{obj_t.label}'")
            return DYNAMIC
        if obj_t is DYNAMIC:
            return DYNAMIC
        self.report(ErrorKind.NotATable, e.obj, f"Expected type table, got '{obj_t.describe()}' instead")
        return DYNAMIC

    def call(self, e: ast.Call, scope: Scope) -> Type:
        if isinstance(e.fn, ast.Name) and e.fn.name == "require" and scope.find("require") is None:
            return self.require(e, scope)
        fn_t = self.expr(e.fn, scope)
        for arg in e.args:
            self.expr(arg, scope)
        self.tick()
        if fn_t is DYNAMIC:
            return DYNAMIC
        if fn_t is TOP:
            self.report(ErrorKind.TypeMismatch, e, "Type 'unknown' must be cast before calling", True)
            return DYNAMIC
        fn_t = self._strip_optional(fn_t, e.fn)
        if isinstance(fn_t, FunctionType):
            if len(e.args) != fn_t.n_params:
                self.report(
                    ErrorKind.CountMismatch,
                    e,
                    f"Argument count mismatch. Function expects {fn_t.n_params} "
                    f"argument(s), but {len(e.args)} are specified",
                )
            return fn_t.return_type()
        if fn_t is DYNAMIC:
            return DYNAMIC
        self.report(ErrorKind.CannotCallNonFunction, e, f"Cannot call non-function '{fn_t.describe()}'")
        return DYNAMIC

    def require(self, e: ast.Call, scope: Scope) -> Type:
        if len(e.args) != 1 or not isinstance(e.args[0], ast.String):
            for arg in e.args:
                self.expr(arg, scope)
            return DYNAMIC
        target = e.args[0].value
        self.tick()
        status, t = self.resolve_require(target)
        if status == REQUIRE_OK:
            return t
        if status == REQUIRE_UNKNOWN:
            self.report(ErrorKind.UnknownRequire, e, f"Unknown require: unable to find module '{target}'")
        elif status == REQUIRE_CYCLE:
            if target not in self._cycle_reported:
                self._cycle_reported.add(target)
                self.report(
                    ErrorKind.ModuleHasCyclicDependency,
                    e,
                    f"Cyclic module dependency: {self.module_id} -> {target}",
                )
        elif status == REQUIRE_ILLEGAL:
            self.report(ErrorKind.IllegalRequire, e, f"Module '{target}' does not return exactly one value")
        return DYNAMIC

    def _operand(self, t: Type, node, want: tuple, target: str) -> None:
        if t is TOP:
            self.report(ErrorKind.TypeMismatch, node, "Type 'unknown' must be cast before use", True)
            return
        if t is DYNAMIC or t in want:
            return
        shown = "nil" if isinstance(t, Optional) or t is NIL else t.describe()
        self.report(ErrorKind.TypeMismatch, node, f"Type '{shown}' could not be converted into '{target}'")

    def binary(self, e: ast.Binary, scope: Scope) -> Type:
        left = self.expr(e.left, scope)
        right = self.expr(e.right, scope)
        self.tick()
        op = e.op
        if op in ("+", "-", "*", "/"):
            if isinstance(left, TableType) and isinstance(right, TableType):
                self.report(
                    ErrorKind.CannotInferBinaryOperation,
                    e,
                    f"Unknown type used in {op} operation; consider adding a type annotation",
                )
                return DYNAMIC
            self._operand(left, e.left, (NUMBER,), "number")
            self._operand(right, e.right, (NUMBER,), "number")
            return NUMBER
        if op == "..":
            self._operand(left, e.left, (STRING, NUMBER), "string")
            self._operand(right, e.right, (STRING, NUMBER), "string")
            return STRING
        if op in ("==", "~=", "<", ">", "<=", ">="):
            return BOOLEAN
        if op == "or":
            if left is NIL:
                return right
            if isinstance(left, Optional):
                return join(left.inner, right)
            return join(left, right)
        # "and"
        return right if left is right else DYNAMIC

    def unary(self, e: ast.Unary, scope: Scope) -> Type:
        t = self.expr(e.operand, scope)
        self.tick()
        if e.op == "not":
            return BOOLEAN
        if e.op == "-":
            self._operand(t, e.operand, (NUMBER,), "number")
            return NUMBER
        # length operator
        if t is TOP:
            self.report(ErrorKind.TypeMismatch, e.operand, "Type 'unknown' must be cast before use", True)
        elif not (t is DYNAMIC or t is STRING or isinstance(t, TableType)):
            self.report(ErrorKind.NotATable, e.operand, f"Expected type table, got '{t.describe()}' instead")
        return NUMBER

    _CAST_TARGETS = {"number": NUMBER, "string": STRING, "boolean": BOOLEAN, "nil": NIL}

    def cast(self, e: ast.Cast, scope: Scope) -> Type:
        t = self.expr(e.expr, scope)
        self.tick()
        if e.type_name == "any":
            return DYNAMIC
        target = self._CAST_TARGETS[e.type_name]
        if t is TOP or t is DYNAMIC or t is target:
            return target
        if isinstance(t, Optional) and (t.inner is target or target is NIL):
            return target
        self.report(
            ErrorKind.TypesAreUnrelated,
            e,
            f"Cannot cast '{t.describe()}' into '{target.describe()}' because the types are unrelated",
        )
        return target
