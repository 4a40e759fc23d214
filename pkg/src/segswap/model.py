"""Core domain model: segment sets over a fixed universe, problem instances,
per-node schedules, and random instance generation.

Segments are 0-indexed internally; any human-facing rendering that lists raw
segments should 1-index them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np


class InvalidParameterError(ValueError):
    """A parameter lies outside its documented domain."""


class GenerationError(RuntimeError):
    """Rejection sampling exceeded its attempt cap."""


# ---------------------------------------------------------------------------
# Segment sets


@dataclass(frozen=True)
class SegmentSet:
    """A subset of {0..n-1} over a fixed universe of n segments.

    Stored as an integer bitmask so that union/containment checks cost one
    machine word operation for the universe sizes this toolkit targets.
    """

    n: int
    mask: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameterError(f"universe size must be >= 0, got {self.n}")
        if not 0 <= self.mask < (1 << self.n):
            raise InvalidParameterError(
                f"mask {self.mask:#x} not a subset of a {self.n}-segment universe"
            )

    @classmethod
    def from_members(cls, n: int, members: Iterable[int]) -> "SegmentSet":
        mask = 0
        for s in members:
            s = int(s)
            if not 0 <= s < n:
                raise InvalidParameterError(f"segment {s} outside universe of size {n}")
            mask |= 1 << s
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> "SegmentSet":
        return cls(n, (1 << n) - 1)

    def members(self) -> tuple[int, ...]:
        return tuple(s for s in range(self.n) if self.mask >> s & 1)

    @property
    def cardinality(self) -> int:
        return self.mask.bit_count()

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.n) - 1

    def complement(self) -> "SegmentSet":
        return SegmentSet(self.n, ((1 << self.n) - 1) ^ self.mask)

    def issubset(self, other: "SegmentSet") -> bool:
        self._check_universe(other)
        return self.mask | other.mask == other.mask

    def union(self, other: "SegmentSet") -> "SegmentSet":
        self._check_universe(other)
        return SegmentSet(self.n, self.mask | other.mask)

    def intersection(self, other: "SegmentSet") -> "SegmentSet":
        self._check_universe(other)
        return SegmentSet(self.n, self.mask & other.mask)

    def _check_universe(self, other: "SegmentSet") -> None:
        if self.n != other.n:
            raise InvalidParameterError(
                f"sets live in different universes (n={self.n} vs n={other.n})"
            )

    __or__ = union
    __and__ = intersection

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, s: int) -> bool:
        return 0 <= s < self.n and bool(self.mask >> s & 1)

    def __iter__(self):
        return iter(self.members())

    def __repr__(self) -> str:
        return f"SegmentSet({{{', '.join(map(str, self.members()))}}}, n={self.n})"


def universe_mask(n: int) -> int:
    return (1 << n) - 1


# ---------------------------------------------------------------------------
# Per-node schedules (slot -> value in [0,1])


class Schedule:
    """A per-node function of the slot index, used for SAP and PEF."""

    def value(self, slot: int) -> float:
        raise NotImplementedError

    def is_zero_from(self, slot: int) -> bool:
        """True only if the schedule is provably 0 for every slot >= slot.

        Termination detection relies on this; schedules that cannot prove it
        (arbitrary callables) return False and runs fall back to the slot cap.
        """
        return False


@dataclass(frozen=True)
class ConstantSchedule(Schedule):
    v: float

    def value(self, slot: int) -> float:
        return self.v

    def is_zero_from(self, slot: int) -> bool:
        return self.v == 0.0


class CallableSchedule(Schedule):
    def __init__(self, fn: Callable[[int], float]):
        self.fn = fn

    def value(self, slot: int) -> float:
        return float(self.fn(slot))


def as_schedule(x) -> Schedule:
    if isinstance(x, Schedule):
        return x
    if callable(x):
        return CallableSchedule(x)
    return ConstantSchedule(float(x))


def per_node_schedules(x, m: int) -> tuple[Schedule, ...]:
    """Coerce a scalar, callable, Schedule, or length-m sequence thereof."""
    if isinstance(x, (list, tuple)):
        if len(x) != m:
            raise InvalidParameterError(f"expected {m} per-node schedules, got {len(x)}")
        return tuple(as_schedule(e) for e in x)
    return (as_schedule(x),) * m


# ---------------------------------------------------------------------------
# Utility functions (strictly increasing tags)

UTILITY_FUNCTIONS: dict[str, Callable[[int], float]] = {
    "cardinality": lambda x: x,
    "sqrt": math.sqrt,
    "log1p": math.log1p,
    "quadratic": lambda x: x * x,
}


def utility_function(tag: str) -> Callable[[int], float]:
    try:
        return UTILITY_FUNCTIONS[tag]
    except KeyError:
        raise InvalidParameterError(
            f"unknown utility tag {tag!r}; known: {sorted(UTILITY_FUNCTIONS)}"
        ) from None


# ---------------------------------------------------------------------------
# Instances and slot state


@dataclass(frozen=True)
class Instance:
    """Immutable problem definition.

    Construction does not enforce the A2 assumptions (nonempty proper sets
    covering the universe); use validate_instance to obtain a violation
    report, or make_instance which generates valid-by-construction instances.
    """

    m: int
    n: int
    initial_sets: tuple[SegmentSet, ...]
    sap_schedules: tuple[Schedule, ...]
    pef_schedules: tuple[Schedule, ...]
    utility: str = "cardinality"
    cost_per_download: float = 1.0
    k: int | None = None
    seed: int | None = None

    @classmethod
    def build(
        cls,
        n: int,
        initial_sets: Sequence,
        sap=0.0,
        pef=1.0,
        utility: str = "cardinality",
        cost_per_download: float = 1.0,
        k: int | None = None,
        seed: int | None = None,
    ) -> "Instance":
        sets = tuple(
            s if isinstance(s, SegmentSet) else SegmentSet.from_members(n, s)
            for s in initial_sets
        )
        if not sets:
            raise InvalidParameterError("an instance needs at least one node")
        for s in sets:
            if s.n != n:
                raise InvalidParameterError("initial set universe size mismatch")
        m = len(sets)
        utility_function(utility)  # fail fast on unknown tags
        if cost_per_download < 0:
            raise InvalidParameterError("cost_per_download must be nonnegative")
        return cls(
            m=m,
            n=n,
            initial_sets=sets,
            sap_schedules=per_node_schedules(sap, m),
            pef_schedules=per_node_schedules(pef, m),
            utility=utility,
            cost_per_download=cost_per_download,
            k=k,
            seed=seed,
        )


@dataclass
class SlotState:
    """Mutable simulation state at the start of slot `slot` (1-based).

    Owned by exactly one run; `rng` is that run's private deterministic
    stream when set.
    """

    slot: int
    sets: list[SegmentSet]
    downloads: list[int]
    rng: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @classmethod
    def initial(cls, inst: Instance, rng: np.random.Generator | None = None) -> "SlotState":
        return cls(slot=1, sets=list(inst.initial_sets), downloads=[0] * inst.m, rng=rng)

    @property
    def m(self) -> int:
        return len(self.sets)

    def aggregate(self) -> int:
        return sum(s.mask.bit_count() for s in self.sets)

    def total_downloads(self) -> int:
        return sum(self.downloads)


# ---------------------------------------------------------------------------
# Generation and validation


def make_instance(
    m: int,
    n: int,
    k: int,
    rng: np.random.Generator,
    *,
    sap=0.0,
    pef=1.0,
    utility: str = "cardinality",
    max_attempts: int = 10_000,
    seed: int | None = None,
) -> Instance:
    """Draw m uniformly random k-subsets of {0..n-1}, rejecting whole draws
    until their union covers the universe.

    Whole-instance rejection (rather than repair) preserves the conditional
    uniform law. k <= n-1 guarantees proper subsets; m*k >= n is necessary
    for coverage.
    """
    if m < 2:
        raise InvalidParameterError(f"need at least 2 nodes, got m={m}")
    if not 1 <= k <= n - 1:
        raise InvalidParameterError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    if m * k < n:
        raise InvalidParameterError(
            f"m*k = {m * k} < n = {n}: the union can never cover the universe"
        )
    full = universe_mask(n)
    for _ in range(max_attempts):
        # Random sort keys give m independent uniform permutations; the first
        # k positions of each are a uniform k-subset.
        idx = np.argsort(rng.random((m, n)), axis=1)[:, :k]
        masks = []
        union = 0
        for row in idx:
            mask = 0
            for s in row:
                mask |= 1 << int(s)
            masks.append(mask)
            union |= mask
        if union == full:
            return Instance.build(
                n,
                [SegmentSet(n, mask) for mask in masks],
                sap=sap,
                pef=pef,
                utility=utility,
                k=k,
                seed=seed,
            )
    raise GenerationError(
        f"no covering draw in {max_attempts} attempts for (m={m}, n={n}, k={k})"
    )


def validate_instance(inst: Instance) -> str | None:
    """Return a description of the first violated assumption, or None if ok.

    Checks, in order: nonempty sets, proper sets, union coverage, SAP/PEF
    ranges (constant schedules checked exactly; callables probed at slot 1).
    """
    for i, s in enumerate(inst.initial_sets):
        if s.is_empty:
            return f"node {i} initial set is empty"
    for i, s in enumerate(inst.initial_sets):
        if s.is_full:
            return f"node {i} holds the full universe"
    union = 0
    for s in inst.initial_sets:
        union |= s.mask
    if union != universe_mask(inst.n):
        missing = [s for s in range(inst.n) if not union >> s & 1]
        return f"union of initial sets is not the universe (missing {missing})"
    for name, schedules in (("sap", inst.sap_schedules), ("pef", inst.pef_schedules)):
        for i, sched in enumerate(schedules):
            if isinstance(sched, ConstantSchedule):
                v = sched.v
            else:
                v = sched.value(1)
            if not 0.0 <= v <= 1.0:
                return f"node {i} {name} value {v} outside [0, 1]"
    return None


# ---------------------------------------------------------------------------
# Serialization: keys m, n, k (optional), initial_sets, sap, pef, utility, seed


def _schedules_to_value(schedules: tuple[Schedule, ...]):
    values = []
    for sched in schedules:
        if not isinstance(sched, ConstantSchedule):
            raise ValueError("only constant schedules have a lossless text form")
        values.append(sched.v)
    if all(v == values[0] for v in values):
        return values[0]
    return values


def instance_to_dict(inst: Instance) -> dict:
    doc = {
        "m": inst.m,
        "n": inst.n,
        "initial_sets": [list(s.members()) for s in inst.initial_sets],
        "sap": _schedules_to_value(inst.sap_schedules),
        "pef": _schedules_to_value(inst.pef_schedules),
        "utility": inst.utility,
    }
    if inst.k is not None:
        doc["k"] = inst.k
    if inst.seed is not None:
        doc["seed"] = inst.seed
    if inst.cost_per_download != 1.0:
        doc["cost_per_download"] = inst.cost_per_download
    return doc


def instance_from_dict(doc: dict) -> Instance:
    inst = Instance.build(
        n=doc["n"],
        initial_sets=doc["initial_sets"],
        sap=doc.get("sap", 0.0),
        pef=doc.get("pef", 1.0),
        utility=doc.get("utility", "cardinality"),
        cost_per_download=doc.get("cost_per_download", 1.0),
        k=doc.get("k"),
        seed=doc.get("seed"),
    )
    if "m" in doc and doc["m"] != inst.m:
        raise InvalidParameterError(
            f"document says m={doc['m']} but lists {inst.m} initial sets"
        )
    return inst


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def load_instance(text: str) -> Instance:
    return instance_from_dict(json.loads(text))
