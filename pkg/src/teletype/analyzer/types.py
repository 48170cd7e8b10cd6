"""The small type lattice the checker infers over."""

from __future__ import annotations


class Type:
    __slots__ = ()

    def describe(self) -> str:
        raise NotImplementedError


class Prim(Type):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def describe(self) -> str:
        return self.name

    def __repr__(self):
        return self.name


NUMBER = Prim("number")
STRING = Prim("string")
BOOLEAN = Prim("boolean")
NIL = Prim("nil")


class _Top(Type):
    """Data-model root in strict mode; usable only after a cast."""

    __slots__ = ()

    def describe(self) -> str:
        return "unknown"

    def __repr__(self):
        return "top"


class _Dynamic(Type):
    __slots__ = ()

    def describe(self) -> str:
        return "any"

    def __repr__(self):
        return "dynamic"


TOP = _Top()
DYNAMIC = _Dynamic()


class TableType(Type):
    __slots__ = ("fields", "sealed", "label")

    def __init__(self, fields=None, sealed=False, label="table"):
        self.fields: dict[str, Type] = dict(fields or {})
        self.sealed = sealed
        self.label = label

    def describe(self) -> str:
        return "{" + ", ".join(f"{k}: {v.describe()}" for k, v in self.fields.items()) + "}"

    def __repr__(self):
        return f"TableType({sorted(self.fields)}, sealed={self.sealed})"


class FunctionType(Type):
    __slots__ = ("n_params", "ret", "resolve")

    def __init__(self, n_params: int, ret: Type | None = None, resolve=None):
        self.n_params = n_params
        self.ret = ret
        # callable producing the return type on first use
        self.resolve = resolve

    def return_type(self) -> Type:
        if self.ret is None:
            if self.resolve is None:
                return DYNAMIC
            resolve, self.resolve = self.resolve, None
            self.ret = resolve()
        return self.ret

    def describe(self) -> str:
        return f"({self.n_params} params) -> ..."

    def __repr__(self):
        return f"FunctionType({self.n_params})"


class Optional(Type):
    __slots__ = ("inner",)

    def __init__(self, inner: Type):
        self.inner = inner

    def describe(self) -> str:
        return self.inner.describe() + "?"

    def __repr__(self):
        return f"Optional({self.inner!r})"


def optional(inner: Type) -> Type:
    if inner is NIL or inner is DYNAMIC or inner is TOP or isinstance(inner, Optional):
        return inner
    return Optional(inner)


def join(a: Type, b: Type) -> Type:
    """Least upper bound; anything not representable collapses to dynamic."""
    if a is b:
        return a
    # data-model taint wins so later uses stay attributable to it
    if a is TOP or b is TOP:
        return TOP
    if a is DYNAMIC or b is DYNAMIC:
        return DYNAMIC
    if a is NIL:
        return optional(b)
    if b is NIL:
        return optional(a)
    if isinstance(a, Optional):
        inner = join(a.inner, b.inner if isinstance(b, Optional) else b)
        return optional(inner)
    if isinstance(b, Optional):
        return optional(join(a, b.inner))
    if isinstance(a, FunctionType) and isinstance(b, FunctionType) and a.n_params == b.n_params:
        return a
    return DYNAMIC


def is_number_like(t: Type) -> bool:
    return t is NUMBER or t is DYNAMIC


def sealed_copy(t: Type, memo: dict | None = None) -> Type:
    """Deep copy of an exported type with every table sealed."""
    if memo is None:
        memo = {}
    if isinstance(t, TableType):
        if id(t) in memo:
            return memo[id(t)]
        out = TableType(sealed=True, label=t.label)
        memo[id(t)] = out
        for k, v in t.fields.items():
            out.fields[k] = sealed_copy(v, memo)
        return out
    if isinstance(t, Optional):
        return Optional(sealed_copy(t.inner, memo))
    if isinstance(t, FunctionType):
        if id(t) in memo:
            return memo[id(t)]
        out = FunctionType(t.n_params, DYNAMIC)
        memo[id(t)] = out
        out.ret = sealed_copy(t.return_type(), memo)
        return out
    return t
