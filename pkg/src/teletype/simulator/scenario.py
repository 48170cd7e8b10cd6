"""Scenarios: seed project files plus an ordered list of editor actions.

Text format, one directive or action per line::

    @start 1700000000000        # simulated epoch ms of the session start
    @step 250                   # clock advance per action, ms
    @data_model Workspace Players
    @module PlayerInventory     # module text follows verbatim until @end
    --!strict
    local M = {}
    return M
    @end
    open PlayerInventory
    type PlayerInventory 2 local M = {coins = 0}
    insert PlayerInventory 3 print(M.coins)
    delete PlayerInventory 3 1
    mode PlayerInventory nonstrict
    switch ShopCatalog
    wait 60000

``type`` overwrites lines from L on (``L = len + 1`` appends); ``insert``
puts new lines before L. In both, the two characters ``\\n`` in the text
separate lines, so one action can write a whole block. ``@globals`` adds
ambient names to the analyzer environment. Lines starting with ``#``
outside a module block are comments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from teletype.kinds import ErrorKind, Mode
from teletype.records import LOC_ANALYSES, LOC_FIELDS

DEFAULT_START_MS = 1_700_000_000_000
DEFAULT_STEP_MS = 250


class ScenarioError(ValueError):
    """Invalid scenario or action; ``index`` is the 0-based action index (or source line)."""

    def __init__(self, message: str, index: int | None = None):
        where = f"action {index}: " if index is not None else ""
        super().__init__(where + message)
        self.index = index


def _escape(text: str) -> str:
    return text.replace("\n", "\\n")


def _unescape(text: str) -> str:
    return text.replace("\\n", "\n")


@dataclass(frozen=True)
class Open:
    module: str

    def dump(self) -> str:
        return f"open {self.module}"


@dataclass(frozen=True)
class TypeText:
    module: str
    line: int
    text: str

    @property
    def lines(self) -> tuple:
        return tuple(self.text.split("\n"))

    def dump(self) -> str:
        return f"type {self.module} {self.line} {_escape(self.text)}"


@dataclass(frozen=True)
class InsertLine:
    module: str
    line: int
    text: str

    @property
    def lines(self) -> tuple:
        return tuple(self.text.split("\n"))

    def dump(self) -> str:
        return f"insert {self.module} {self.line} {_escape(self.text)}"


@dataclass(frozen=True)
class DeleteLines:
    module: str
    line: int
    count: int = 1

    def dump(self) -> str:
        return f"delete {self.module} {self.line} {self.count}"


@dataclass(frozen=True)
class SetMode:
    module: str
    mode: Mode

    def dump(self) -> str:
        return f"mode {self.module} {self.mode.value}"


@dataclass(frozen=True)
class Switch:
    module: str

    def dump(self) -> str:
        return f"switch {self.module}"


@dataclass(frozen=True)
class Wait:
    ms: int

    def dump(self) -> str:
        return f"wait {self.ms}"


Action = Union[Open, TypeText, InsertLine, DeleteLines, SetMode, Switch, Wait]
EDIT_ACTIONS = (TypeText, InsertLine, DeleteLines, SetMode)


@dataclass
class Scenario:
    modules: dict = field(default_factory=dict)  # module id -> tuple of lines
    actions: list = field(default_factory=list)
    data_model: tuple = ()
    globals: tuple = ()  # extra ambient names
    start_ms: int = DEFAULT_START_MS
    step_ms: int = DEFAULT_STEP_MS

    def validate(self) -> None:
        if self.step_ms < 1:
            raise ScenarioError("step must be at least 1 ms")
        for i, act in enumerate(self.actions):
            if isinstance(act, Wait):
                if act.ms < 0:
                    raise ScenarioError("negative wait", i)
            elif act.module not in self.modules:
                raise ScenarioError(f"unknown module {act.module!r}", i)

    def dumps(self) -> str:
        out = [f"@start {self.start_ms}", f"@step {self.step_ms}"]
        if self.data_model:
            out.append("@data_model " + " ".join(self.data_model))
        if self.globals:
            out.append("@globals " + " ".join(self.globals))
        for mid, lines in self.modules.items():
            out.append(f"@module {mid}")
            out.extend(lines)
            out.append("@end")
        out.extend(a.dump() for a in self.actions)
        return "\n".join(out) + "\n"


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ScenarioError(f"line {lineno}: expected an integer, got {tok!r}") from None


def parse_scenario(text: str) -> Scenario:
    sc = Scenario()
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        raw = lines[i]
        lineno = i + 1
        i += 1
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("@"):
            head, _, rest = stripped.partition(" ")
            if head == "@start":
                sc.start_ms = _int(rest.strip(), lineno)
            elif head == "@step":
                sc.step_ms = _int(rest.strip(), lineno)
            elif head == "@data_model":
                sc.data_model = tuple(rest.split())
            elif head == "@globals":
                sc.globals = tuple(rest.split())
            elif head == "@module":
                mid = rest.strip()
                if not mid or mid in sc.modules:
                    raise ScenarioError(f"line {lineno}: bad or duplicate module name {mid!r}")
                body = []
                while i < len(lines) and lines[i].strip() != "@end":
                    body.append(lines[i])
                    i += 1
                if i >= len(lines):
                    raise ScenarioError(f"line {lineno}: @module {mid} has no @end")
                i += 1
                sc.modules[mid] = tuple(body)
            else:
                raise ScenarioError(f"line {lineno}: unknown directive {head}")
            continue
        sc.actions.append(_parse_action(raw.lstrip(), lineno, len(sc.actions)))
    sc.validate()
    return sc


def _parse_action(raw: str, lineno: int, index: int) -> Action:
    verb, _, rest = raw.partition(" ")
    try:
        if verb in ("type", "insert"):
            mid, line, *text = rest.split(" ", 2)
            cls = TypeText if verb == "type" else InsertLine
            return cls(mid, _int(line, lineno), _unescape(text[0]) if text else "")
        parts = rest.split()
        if verb == "open":
            (mid,) = parts
            return Open(mid)
        if verb == "switch":
            (mid,) = parts
            return Switch(mid)
        if verb == "delete":
            mid, line, *n = parts
            return DeleteLines(mid, _int(line, lineno), _int(n[0], lineno) if n else 1)
        if verb == "mode":
            mid, mode = parts
            return SetMode(mid, Mode(mode))
        if verb == "wait":
            (ms,) = parts
            return Wait(_int(ms, lineno))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"line {lineno}: malformed {verb!r} action: {exc}", index) from None
    raise ScenarioError(f"line {lineno}: unknown action {verb!r}", index)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# -- random generation ------------------------------------------------------------------

# Everything a serialized record can contain besides digits and punctuation.
# Generated names must not be substrings of it, or the privacy audit would
# flag a coincidence rather than a leak.
WIRE_VOCABULARY = " ".join(
    [
        "session_id client_ts_ms server_ts_ms mode reason lines_total lines_edit overall",
        "too_complex edit_kinds curr prev corrupt keystroke module_switch",
        " ".join(LOC_ANALYSES),
        " ".join(LOC_FIELDS),
        " ".join(m.value for m in Mode),
        " ".join(k.value for k in ErrorKind),
        "true false null",
    ]
)

_PREFIXES = ("Player", "Shop", "Weapon", "Quest", "Lobby", "Pet", "Map", "Chat", "Daily", "Guild")
_SUFFIXES = ("Inventory", "Catalog", "Stats", "Tracker", "Spawner", "Service", "Manager", "Handler")
_FIELDS = ("speed", "label", "power", "width", "radius", "health", "color", "bonus")
_ASSETS = ("Workspace", "Players", "Lighting", "SoundService")
_WORDS = ("lorem", "ipsum", "dolor", "amet", "velit", "magna")
PRAGMA = {Mode.NOCHECK: "--!nocheck", Mode.NONSTRICT: "--!nonstrict", Mode.STRICT: "--!strict"}


def _safe(name: str) -> str:
    if len(name) >= 4 and name in WIRE_VOCABULARY:
        raise AssertionError(f"generated name {name!r} collides with the wire vocabulary")
    return name


@dataclass(frozen=True)
class GenParams:
    n_modules: int = 4
    n_actions: int = 500
    mode_mix: tuple = (0.90, 0.095, 0.005)
    typo_rate: float = 0.1
    switch_rate: float = 0.04
    mode_change_rate: float = 0.01

    def __post_init__(self):
        if self.n_modules < 1 or self.n_actions < 0:
            raise ValueError("need at least one module and a non-negative action count")
        if len(self.mode_mix) != 3 or any(p < 0 for p in self.mode_mix) or abs(sum(self.mode_mix) - 1) > 1e-9:
            raise ValueError(f"mode_mix must be three probabilities summing to 1, got {self.mode_mix}")
        for name in ("typo_rate", "switch_rate", "mode_change_rate"):
            p = getattr(self, name)
            if not 0 <= p <= 1:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


class _ModuleShape:
    """Generator-side bookkeeping for one module: where the editable body lives."""

    def __init__(self, mid, mode, deps, fields, rng):
        self.mid = mid
        self.fields = fields
        self.deps = deps
        preamble = [PRAGMA[mode]]
        for j, dep in enumerate(deps):
            preamble.append(f'local Dep{j} = require("{dep}")')
        pairs = ", ".join(
            f'{f} = "{rng.choice(_WORDS)}"' if f == "label" else f"{f} = {rng.randint(1, 9)}" for f in fields
        )
        preamble += [
            f"local cfg = {{{pairs}}}",
            "local function scale(v)",
            "  return v + 1",
            "end",
            "local M = {}",
        ]
        self.preamble = preamble
        self.body = [self.clean_line(rng) for _ in range(rng.randint(2, 6))]

    @property
    def lines(self) -> list[str]:
        return self.preamble + self.body + ["return M"]

    @property
    def body_start(self) -> int:
        return len(self.preamble) + 1

    def num_field(self, rng) -> str:
        nums = [f for f in self.fields if f != "label"]
        return rng.choice(nums)

    def clean_line(self, rng) -> str:
        f = self.num_field(rng)
        choices = [
            f"cfg.{f} = cfg.{f} + {rng.randint(1, 9)}",
            f"M.{f} = scale(cfg.{f})",
            f"local tmp = cfg.{f} + {rng.randint(1, 9)}",
            f"scale(cfg.{f})",
            f"if cfg.{f} then print(cfg.{f}) end",
            'print(cfg.label .. "' + rng.choice(_WORDS) + '")',
            f"local asset = game.{rng.choice(_ASSETS)}",
        ]
        if self.deps:
            choices.append(f"print(Dep{rng.randrange(len(self.deps))})")
        return rng.choice(choices)

    def typo_line(self, rng) -> str:
        f = self.num_field(rng)
        choices = [
            f"print(cfg{f[0]})",  # unbound name
            f"print(cfg.{f[:-1]})",  # missing property
            f"print(cfg.{f.capitalize()})",  # wrong case
            f"scale(cfg.{f}, 2)",
            f"cfg.{f}(1)",
            f"cfg.{f}.x = 1",
            f"local bad = cfg.label + {rng.randint(1, 9)}",
            'local gone = require("Nowhere")',
            f"if cfg.{f} then",  # unterminated block
        ]
        return rng.choice(choices)


def gen_random_scenario(seed: int, params: GenParams | None = None, **overrides) -> Scenario:
    """Deterministic random scenario; ``overrides`` replace fields of ``params``."""
    if params is None:
        params = GenParams(**overrides)
    elif overrides:
        params = GenParams(**{**params.__dict__, **overrides})
    rng = random.Random(seed)
    modes = Mode.ordered()

    names: list[str] = []
    combos = [p + s for p in _PREFIXES for s in _SUFFIXES]
    rng.shuffle(combos)
    for i in range(params.n_modules):
        base = combos[i % len(combos)]
        names.append(_safe(base if i < len(combos) else f"{base}{i // len(combos)}"))

    shapes: dict[str, _ModuleShape] = {}
    for i, mid in enumerate(names):
        mode = rng.choices(modes, weights=params.mode_mix)[0]
        earlier = names[max(0, i - 3) : i]
        deps = [d for d in earlier if rng.random() < 0.5]
        fields = ["label"] + rng.sample([f for f in _FIELDS if f != "label"], 3)
        shapes[mid] = _ModuleShape(mid, mode, deps, fields, rng)

    sc = Scenario(
        modules={mid: tuple(s.lines) for mid, s in shapes.items()},
        data_model=_ASSETS,
        start_ms=DEFAULT_START_MS + rng.randrange(0, 24 * 3600 * 1000),
        step_ms=DEFAULT_STEP_MS,
    )
    if params.n_actions == 0:
        return sc

    focus = rng.choice(names)
    sc.actions.append(Open(focus))
    made = 0
    while made < params.n_actions:
        r = rng.random()
        if r < 0.05:
            sc.actions.append(Wait(rng.choice((1_000, 5_000, 30_000, 600_000))))
            continue
        shape = shapes[focus]
        if len(names) > 1 and r < 0.05 + params.switch_rate:
            focus = rng.choice([n for n in names if n != focus])
            sc.actions.append(Switch(focus))
        elif rng.random() < params.mode_change_rate:
            sc.actions.append(SetMode(focus, rng.choice(modes)))
        else:
            sc.actions.append(_random_edit(shape, rng, params.typo_rate))
        made += 1
    return sc


def _random_edit(shape: _ModuleShape, rng: random.Random, typo_rate: float) -> Action:
    text = shape.typo_line(rng) if rng.random() < typo_rate else shape.clean_line(rng)
    n = len(shape.body)
    op = rng.random()
    if n and op < 0.45:
        k = rng.randrange(n)
        shape.body[k] = text
        return TypeText(shape.mid, shape.body_start + k, text)
    if n > 1 and op < 0.6:
        k = rng.randrange(n)
        count = min(rng.choice((1, 1, 2)), n - k)
        del shape.body[k : k + count]
        return DeleteLines(shape.mid, shape.body_start + k, count)
    k = rng.randint(0, n)
    shape.body.insert(k, text)
    return InsertLine(shape.mid, shape.body_start + k, text)
