"""Domain types for egalitarian jurisdiction-formation games.

Agents are numbered 1..n. A coalition is stored as an integer bitmask where
agent ``i`` occupies bit ``i - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

# Strict-improvement margin for every strict inequality tested on floats.
DELTA = 1e-9


class GameError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GameError, ValueError):
    pass


class NonPositiveProjectCost(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class EmptyAgentSet(ValidationError):
    pass


class BadExponent(ValidationError):
    pass


class MissingTableEntry(ValidationError):
    pass


class PartitionError(GameError, ValueError):
    pass


class OverlappingBlocks(PartitionError):
    pass


class IncompleteCover(PartitionError):
    pass


class InstanceTooLarge(GameError):
    pass


class NonConvergence(RuntimeWarning):
    """Issued when an iterative location solver hits its iteration cap."""


class StepLimitExceeded(GameError):
    """Best-response dynamics ran out of steps; the partial trace is attached."""

    def __init__(self, trace: "DynamicsTrace"):
        super().__init__(f"no fixed point or cycle within {len(trace.moves)} steps")
        self.trace = trace


# --------------------------------------------------------------------------
# coalitions and partitions


@dataclass(frozen=True, order=True)
class Coalition:
    mask: int

    def __post_init__(self):
        if self.mask <= 0:
            raise ValueError("a coalition must be nonempty")

    @classmethod
    def of(cls, members: Iterable[int]) -> "Coalition":
        mask = 0
        for i in members:
            i = int(i)
            if i < 1:
                raise ValueError(f"agent ids are 1-based, got {i}")
            mask |= 1 << (i - 1)
        return cls(mask)

    @classmethod
    def parse(cls, text: str) -> "Coalition":
        """Parse the textual form ``"1,2,3"`` (whitespace ignored)."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if not parts:
            raise ValueError(f"empty coalition: {text!r}")
        try:
            return cls.of(int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"bad coalition {text!r}: {exc}") from None

    @property
    def members(self) -> tuple[int, ...]:
        out = []
        m, i = self.mask, 1
        while m:
            if m & 1:
                out.append(i)
            m >>= 1
            i += 1
        return tuple(out)

    @property
    def smallest(self) -> int:
        return (self.mask & -self.mask).bit_length()

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, agent: int) -> bool:
        return agent >= 1 and bool(self.mask >> (agent - 1) & 1)

    def __iter__(self):
        return iter(self.members)

    def __or__(self, other: "Coalition") -> "Coalition":
        return Coalition(self.mask | other.mask)

    def __str__(self) -> str:
        return ",".join(map(str, self.members))


@dataclass(frozen=True)
class Partition:
    """Disjoint coalitions covering agents 1..n, blocks sorted by smallest member.

    Build through :func:`canonical_partition` (or :meth:`parse`) so that the
    disjoint-cover check runs.
    """

    blocks: tuple[Coalition, ...]
    n: int

    def block_of(self, agent: int) -> Coalition:
        for b in self.blocks:
            if agent in b:
                return b
        raise KeyError(agent)

    @classmethod
    def parse(cls, text: str, n: int) -> "Partition":
        """Parse ``"1|2,3|4,5,6"``."""
        blocks = [Coalition.parse(b) for b in text.split("|") if b.strip()]
        return canonical_partition(blocks, n)

    def labels(self) -> tuple[int, ...]:
        """Restricted-growth labelling: agent i belongs to block labels[i-1]."""
        out = [0] * self.n
        for k, b in enumerate(self.blocks):
            for i in b:
                out[i - 1] = k
        return tuple(out)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __str__(self) -> str:
        return " | ".join(str(b) for b in self.blocks)


def canonical_partition(blocks: Iterable[Coalition], n: int) -> Partition:
    blocks = list(blocks)
    if not blocks:
        raise IncompleteCover("a partition needs at least one block")
    seen = 0
    for b in blocks:
        if seen & b.mask:
            raise OverlappingBlocks(f"agents {Coalition(seen & b.mask)} appear in more than one block")
        seen |= b.mask
    full = (1 << n) - 1
    if seen & ~full:
        raise IncompleteCover(f"agents {Coalition(seen & ~full)} are outside 1..{n}")
    if seen != full:
        raise IncompleteCover(f"agents {Coalition(full & ~seen)} are not covered")
    return Partition(tuple(sorted(blocks, key=lambda b: b.smallest)), n)


def partition_from_labels(labels: Sequence[int]) -> Partition:
    masks: dict[int, int] = {}
    for i, lab in enumerate(labels):
        masks[lab] = masks.get(lab, 0) | (1 << i)
    return canonical_partition((Coalition(m) for m in masks.values()), len(labels))


# --------------------------------------------------------------------------
# instance


@dataclass(frozen=True)
class TransportSpec:
    """Transportation cost d(r) = r ** exponent, exponent >= 1."""

    exponent: float = 1.0
    kind: str = "power"

    def __post_init__(self):
        if self.kind != "power":
            raise ValidationError(f"unsupported transport kind {self.kind!r}")
        if not (math.isfinite(self.exponent) and self.exponent >= 1):
            raise BadExponent(f"transport exponent must be a finite real >= 1, got {self.exponent}")

    def __call__(self, r):
        if self.exponent == 1:
            return r
        if self.exponent == 2:
            return r * r
        return r**self.exponent


@dataclass(frozen=True)
class ProjectCostSpec:
    """Project cost g(S).

    ``constant`` uses ``value``; ``by_size`` uses ``sizes[|S| - 1]``;
    ``table`` looks the coalition mask up in ``entries`` and falls back to
    ``default`` (itself a constant or by_size spec).
    """

    kind: str = "constant"
    value: float | None = None
    sizes: tuple[float, ...] | None = None
    entries: tuple[tuple[int, float], ...] = ()
    default: "ProjectCostSpec | None" = None

    @classmethod
    def constant(cls, value: float) -> "ProjectCostSpec":
        return cls("constant", value=float(value))

    @classmethod
    def by_size(cls, sizes: Sequence[float]) -> "ProjectCostSpec":
        return cls("by_size", sizes=tuple(float(s) for s in sizes))

    @classmethod
    def table(cls, entries: Mapping[Coalition | int, float], default: "ProjectCostSpec | None") -> "ProjectCostSpec":
        items = sorted(
            (c.mask if isinstance(c, Coalition) else int(c), float(v)) for c, v in entries.items()
        )
        return cls("table", entries=tuple(items), default=default)

    @cached_property
    def _lookup(self) -> dict[int, float]:
        return dict(self.entries)

    def __call__(self, mask: int, size: int) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "by_size":
            return self.sizes[size - 1]
        if mask in self._lookup:
            return self._lookup[mask]
        if self.default is None:
            raise MissingTableEntry(f"no project cost for coalition {Coalition(mask)} and no default rule")
        return self.default(mask, size)

    def validate(self, n: int) -> None:
        def positive(v, what):
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise NonPositiveProjectCost(f"{what} must be a positive finite real, got {v}")

        if self.kind == "constant":
            positive(self.value, "constant project cost")
        elif self.kind == "by_size":
            if self.sizes is None or len(self.sizes) != n:
                raise ValidationError(f"by_size project cost needs exactly {n} values")
            for s, v in enumerate(self.sizes, 1):
                positive(v, f"project cost for size {s}")
        elif self.kind == "table":
            full = (1 << n) - 1
            for mask, v in self.entries:
                if mask <= 0 or mask & ~full:
                    raise ValidationError(f"table entry {mask:#b} is not a coalition of agents 1..{n}")
                positive(v, f"project cost for {Coalition(mask)}")
            if self.default is None:
                raise MissingTableEntry("table project cost requires a default rule")
            if self.default.kind == "table":
                raise ValidationError("the default rule must be constant or by_size")
            self.default.validate(n)
        else:
            raise ValidationError(f"unknown project cost kind {self.kind!r}")


@dataclass(frozen=True)
class Instance:
    dimension: int
    peaks: tuple[tuple[float, ...], ...]
    transport: TransportSpec = field(default_factory=TransportSpec)
    project_cost: ProjectCostSpec = field(default_factory=lambda: ProjectCostSpec.constant(1.0))

    def __post_init__(self):
        if not isinstance(self.dimension, int) or isinstance(self.dimension, bool) or self.dimension < 1:
            raise DimensionMismatch(f"dimension must be a positive integer, got {self.dimension!r}")
        if not self.peaks:
            raise EmptyAgentSet("an instance needs at least one agent")
        for i, p in enumerate(self.peaks, 1):
            if len(p) != self.dimension:
                raise DimensionMismatch(
                    f"agent {i} has {len(p)} coordinates, expected {self.dimension}"
                )
            if not all(math.isfinite(x) for x in p):
                raise ValidationError(f"agent {i} has a non-finite coordinate")
        self.project_cost.validate(self.n)

    @classmethod
    def from_peaks(cls, peaks, exponent: float = 1.0, project_cost: float | ProjectCostSpec = 1.0) -> "Instance":
        """Convenience constructor; scalar peaks mean a 1-D instance."""
        rows = []
        for p in peaks:
            if np.ndim(p) == 0:
                rows.append((float(p),))
            else:
                rows.append(tuple(float(x) for x in p))
        if not isinstance(project_cost, ProjectCostSpec):
            project_cost = ProjectCostSpec.constant(project_cost)
        dim = len(rows[0]) if rows else 1
        return cls(dim, tuple(rows), TransportSpec(float(exponent)), project_cost)

    @property
    def n(self) -> int:
        return len(self.peaks)

    @property
    def alpha(self) -> float:
        return self.transport.exponent

    @cached_property
    def points(self) -> np.ndarray:
        arr = np.array(self.peaks, dtype=float)
        arr.setflags(write=False)
        return arr

    @property
    def grand(self) -> Coalition:
        return Coalition((1 << self.n) - 1)

    def check_coalition(self, coalition: Coalition) -> None:
        if coalition.mask >> self.n:
            raise ValueError(f"coalition {coalition} has agents outside 1..{self.n}")

    def coalition_points(self, coalition: Coalition) -> np.ndarray:
        self.check_coalition(coalition)
        return self.points[[i - 1 for i in coalition.members]]


def validate_instance(raw: Mapping) -> Instance:
    """Build an :class:`Instance` from its parsed document form.

    Expected keys: ``dimension``, ``agents``, ``transport`` and
    ``project_cost``. Unknown keys are rejected.
    """
    _require_keys(raw, {"dimension", "agents", "transport", "project_cost"}, "instance")
    dim = raw["dimension"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise DimensionMismatch(f"dimension must be a positive integer, got {dim!r}")
    agents = raw["agents"]
    if not isinstance(agents, list):
        raise ValidationError("agents must be a list of coordinate lists")
    if not agents:
        raise EmptyAgentSet("agents list is empty")
    peaks = []
    for i, p in enumerate(agents, 1):
        if not isinstance(p, list) or not all(_is_number(x) for x in p):
            raise ValidationError(f"agent {i} must be a list of numbers")
        if len(p) != dim:
            raise DimensionMismatch(f"agent {i} has {len(p)} coordinates, expected {dim}")
        peaks.append(tuple(float(x) for x in p))

    t = raw["transport"]
    _require_keys(t, {"kind", "exponent"}, "transport")
    if t["kind"] != "power":
        raise ValidationError(f"unsupported transport kind {t['kind']!r}")
    if not _is_number(t["exponent"]):
        raise BadExponent("transport exponent must be a number")
    transport = TransportSpec(float(t["exponent"]))

    project_cost = _project_cost_from_raw(raw["project_cost"], len(peaks), allow_table=True)
    return Instance(dim, tuple(peaks), transport, project_cost)


def instance_to_raw(instance: Instance) -> dict:
    """Inverse of :func:`validate_instance`."""
    return {
        "dimension": instance.dimension,
        "agents": [list(p) for p in instance.peaks],
        "transport": {"kind": "power", "exponent": instance.transport.exponent},
        "project_cost": _project_cost_to_raw(instance.project_cost),
    }


def _project_cost_from_raw(raw, n: int, allow_table: bool) -> ProjectCostSpec:
    if not isinstance(raw, Mapping) or "kind" not in raw:
        raise ValidationError("project_cost must be an object with a 'kind'")
    kind = raw["kind"]
    if kind == "constant":
        _require_keys(raw, {"kind", "value"}, "project_cost")
        spec = ProjectCostSpec.constant(_number(raw["value"], "project cost value"))
    elif kind == "by_size":
        _require_keys(raw, {"kind", "values"}, "project_cost")
        vals = raw["values"]
        if not isinstance(vals, list):
            raise ValidationError("by_size values must be a list")
        spec = ProjectCostSpec.by_size([_number(v, "by_size value") for v in vals])
    elif kind == "table" and allow_table:
        _require_keys(raw, {"kind", "entries", "default"}, "project_cost", optional={"default"})
        entries = {}
        for e in raw["entries"]:
            _require_keys(e, {"coalition", "cost"}, "table entry")
            c = Coalition.of(e["coalition"])
            if c.mask in entries:
                raise ValidationError(f"duplicate table entry for {c}")
            entries[c.mask] = _number(e["cost"], "table cost")
        default = raw.get("default")
        default = None if default is None else _project_cost_from_raw(default, n, allow_table=False)
        spec = ProjectCostSpec.table(entries, default)
    else:
        raise ValidationError(f"unknown project cost kind {kind!r}")
    spec.validate(n)
    return spec


def _project_cost_to_raw(spec: ProjectCostSpec) -> dict:
    if spec.kind == "constant":
        return {"kind": "constant", "value": spec.value}
    if spec.kind == "by_size":
        return {"kind": "by_size", "values": list(spec.sizes)}
    out = {
        "kind": "table",
        "entries": [{"coalition": list(Coalition(m).members), "cost": v} for m, v in spec.entries],
    }
    if spec.default is not None:
        out["default"] = _project_cost_to_raw(spec.default)
    return out


def _require_keys(raw, keys: set, what: str, optional: set = frozenset()):
    if not isinstance(raw, Mapping):
        raise ValidationError(f"{what} must be an object")
    unknown = set(raw) - keys
    if unknown:
        raise ValidationError(f"unknown key(s) in {what}: {', '.join(sorted(unknown))}")
    missing = keys - optional - set(raw)
    if missing:
        raise ValidationError(f"missing key(s) in {what}: {', '.join(sorted(missing))}")


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _number(x, what: str) -> float:
    if not _is_number(x):
        raise ValidationError(f"{what} must be a number, got {x!r}")
    return float(x)


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class CoalitionEvaluation:
    coalition: Coalition
    location: tuple[float, ...]
    transport_total: float
    project_cost: float
    egalitarian_cost: float
    tax_shares: dict[int, float]


class Target(Enum):
    NEW_SINGLETON = "new_singleton"


NEW_SINGLETON = Target.NEW_SINGLETON


@dataclass(frozen=True)
class DeviationMove:
    agent: int
    from_block: Coalition
    to_block: Coalition | Target
    old_cost: float
    new_cost: float

    @property
    def destination(self) -> Coalition:
        """The coalition the agent ends up in."""
        single = Coalition.of([self.agent])
        return single if self.to_block is NEW_SINGLETON else self.to_block | single

    def __str__(self) -> str:
        to = "new singleton" if self.to_block is NEW_SINGLETON else "{" + str(self.to_block) + "}"
        return f"agent {self.agent}: {{{self.from_block}}} -> {to} ({self.old_cost:.12g} -> {self.new_cost:.12g})"


@dataclass
class DynamicsTrace:
    states: list[Partition]
    moves: list[DeviationMove]
    terminal: str | None = None  # "fixed_point", "cycle" or None (step limit)
    cycle_start: int | None = None

    @property
    def cycle_length(self) -> int | None:
        if self.terminal != "cycle":
            return None
        return len(self.states) - 1 - self.cycle_start

    @property
    def cycle(self) -> list[Partition]:
        if self.terminal != "cycle":
            return []
        return self.states[self.cycle_start:-1]
