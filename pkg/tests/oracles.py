"""Reference implementations used only by the tests."""

from __future__ import annotations

import random

from teletype.edit_range import Delete, Insert, Modify


class TaggedBuffer:
    """A document as a list of per-line flags: touched since the last reset or not.

    Touched lines move with insertions and vanish with deletions. After
    every operation the flags are filled between the first and last touched
    line, because a single interval cannot express gaps.
    """

    def __init__(self, n_lines: int):
        self.tags = [False] * n_lines

    def apply(self, op) -> None:
        if isinstance(op, Modify):
            while len(self.tags) < op.to_line:
                self.tags.append(False)
            for i in range(op.from_line - 1, op.to_line):
                self.tags[i] = True
        elif isinstance(op, Insert):
            while len(self.tags) < op.at_line - 1:
                self.tags.append(False)
            self.tags[op.at_line - 1 : op.at_line - 1] = [True] * op.n_lines
        elif isinstance(op, Delete):
            del self.tags[op.from_line - 1 : op.from_line - 1 + op.n_lines]
        touched = [i for i, t in enumerate(self.tags) if t]
        if touched:
            for i in range(touched[0], touched[-1] + 1):
                self.tags[i] = True

    def lines(self) -> set[int]:
        return {i + 1 for i, t in enumerate(self.tags) if t}


def random_ops(rng: random.Random, n_lines: int, count: int):
    """Edit ops valid for a document that starts with ``n_lines`` lines."""
    ops = []
    n = n_lines
    for _ in range(count):
        r = rng.random()
        if n == 0 or r < 0.35:
            at = rng.randint(1, n + 1)
            k = rng.randint(1, 4)
            ops.append(Insert(at, k))
            n += k
        elif r < 0.65:
            a = rng.randint(1, n)
            b = rng.randint(a, min(n, a + 5))
            ops.append(Modify(a, b))
        else:
            a = rng.randint(1, n)
            k = rng.randint(1, min(4, n - a + 1))
            ops.append(Delete(a, k))
            n -= k
    return ops


def reverse_reachable(graph: dict, node: str) -> set:
    """Brute force: every module with a require path to ``node``, plus ``node``."""
    out = {node}
    for start in graph:
        seen, todo = set(), [start]
        while todo:
            cur = todo.pop()
            if cur == node:
                out.add(start)
                break
            for nxt in graph.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    return out


_STATEMENTS = [
    "local a{i} = {{p = {n}, q = nil}}",
    "if cond then a{i}.q = {n} end",
    "local b{i} = a{i}.p + a{i}.q",
    "local c{i} = a{i}.r",
    "local d{i} = a{i}.P",
    "print(e{i})",
    "local f{i} = game.Workspace",
    "local g{i} = (game :: any).Workspace",
    "local function h{i}(v) if v then return v end end",
    "local k{i} = h0(1, 2)",
    "a{i}.p(1)",
    "a{i}.p.z = 1",
    'local m{i} = require("Dep")',
    'local n{i} = require("Nope")',
    "local s{i} = (\"txt\" :: number)",
    "local t{i} = {{}} + {{}}",
    "local u{i} = a{i}.p .. \"x\"",
    "while cond do a{i}.p = a{i}.p + 1 end",
    "Dep.extra = {n}",
]


def random_module(rng: random.Random, mode: str | None = None) -> str:
    """A random module over a fixed vocabulary; every statement template is well formed."""
    mode = mode or rng.choice(["nocheck", "nonstrict", "strict"])
    lines = [f"--!{mode}", 'local Dep = require("Dep")', "local function h0(v) return v end", "local a0 = {p = 1, q = nil}"]
    for i in range(1, rng.randint(2, 12)):
        lines.append(rng.choice(_STATEMENTS).format(i=rng.choice([0, i]), n=rng.randint(1, 9)))
    if rng.random() < 0.1:
        lines.append("if cond then")  # unterminated
    lines.append("return a0")
    return "\n".join(lines)


DEP_SOURCE = "--!strict\nlocal M = {value = 1}\nreturn M"


def random_dag(rng: random.Random, n: int):
    """n modules requiring only earlier ones: (sources, require graph)."""
    names = [f"M{i:02d}" for i in range(n)]
    src = {}
    graph = {}
    for i, name in enumerate(names):
        deps = [d for d in names[:i] if rng.random() < 0.35]
        graph[name] = set(deps)
        src[name] = "--!nonstrict\n" + "".join(f'local v{j} = require("{d}")\n' for j, d in enumerate(deps)) + "return {}"
    return src, graph
