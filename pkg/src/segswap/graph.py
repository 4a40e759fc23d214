"""Give-and-take exchange algebra: the per-slot exchange graph, incremental
utility gains, truncated preference lists, and the first-preference digraph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import SegmentSet, SlotState, utility_function


class GTViolationError(ValueError):
    """An exchange was attempted between sets that do not satisfy GT."""


def gt_satisfied(a: SegmentSet, b: SegmentSet) -> bool:
    """True iff each set holds at least one segment the other lacks.

    Equivalently: the union is strictly larger than both, i.e. neither set
    contains the other.
    """
    a._check_universe(b)
    u = a.mask | b.mask
    return u != a.mask and u != b.mask


def exchange(a: SegmentSet, b: SegmentSet) -> tuple[SegmentSet, SegmentSet]:
    """Perform a GT-compliant exchange: both sides end up with the union."""
    if not gt_satisfied(a, b):
        raise GTViolationError(f"exchange requires GT: {a} vs {b}")
    u = SegmentSet(a.n, a.mask | b.mask)
    return u, u


def incremental_gain(i: int, j: int, state: SlotState, utility: str = "cardinality"):
    """g(i, j, r) = f(|O_i u O_j|) - f(|O_i|): what i gains by pairing with j."""
    if i == j:
        raise ValueError("a node has no gain against itself")
    f = utility_function(utility)
    mi = state.sets[i].mask
    u = mi | state.sets[j].mask
    return f(u.bit_count()) - f(mi.bit_count())


@dataclass(frozen=True)
class ExchangeGraph:
    """Symmetric GT adjacency at one slot; neighbor lists are id-sorted."""

    slot: int
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.adjacency)

    @property
    def is_empty(self) -> bool:
        return all(not row for row in self.adjacency)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, row in enumerate(self.adjacency) for j in row if i < j]

    def render(self, state: SlotState, utility: str = "cardinality") -> str:
        """One node per line: `i: j1(g1) j2(g2) ...` with i's gain against each."""
        lines = []
        for i, row in enumerate(self.adjacency):
            entries = " ".join(
                f"{j}({_fmt_gain(incremental_gain(i, j, state, utility))})" for j in row
            )
            lines.append(f"{i}: {entries}".rstrip())
        return "\n".join(lines)


def build_exchange_graph(state: SlotState) -> ExchangeGraph:
    masks = [s.mask for s in state.sets]
    m = len(masks)
    rows: list[list[int]] = [[] for _ in range(m)]
    for i in range(m):
        a = masks[i]
        for j in range(i + 1, m):
            u = a | masks[j]
            if u != a and u != masks[j]:
                rows[i].append(j)
                rows[j].append(i)
    return ExchangeGraph(slot=state.slot, adjacency=tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class PreferenceList:
    """i's GT neighbors ranked by gain (descending, ties by ascending id) and
    truncated to `limit` = max(1, floor(pef * |l_i|)) entries."""

    owner: int
    ranked: tuple[tuple[int, float], ...]
    limit: int

    def neighbor_ids(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.ranked)

    def render(self) -> str:
        entries = " ".join(f"{j}({_fmt_gain(g)})" for j, g in self.ranked)
        return f"{self.owner}: {entries}".rstrip()


def preference_list(
    i: int,
    graph: ExchangeGraph,
    state: SlotState,
    pef: float,
    utility: str = "cardinality",
) -> PreferenceList:
    if not 0.0 <= pef <= 1.0:
        raise ValueError(f"pef must lie in [0, 1], got {pef}")
    f = utility_function(utility)
    mi = state.sets[i].mask
    ci = mi.bit_count()
    fi = f(ci)
    neighbors = graph.neighbors(i)
    # Rank by union cardinality: for strictly increasing f the gain order
    # depends only on |O_i u O_j|, so this is the f-independent sort key.
    by_union = sorted(
        (((mi | state.sets[j].mask).bit_count(), j) for j in neighbors),
        key=lambda t: (-t[0], t[1]),
    )
    ranked = []
    for u, j in by_union:
        gain = f(u) - fi
        assert gain > 0, "GT neighbors must yield strictly positive gain"
        ranked.append((j, gain))
    limit = max(1, math.floor(pef * len(neighbors)))
    return PreferenceList(owner=i, ranked=tuple(ranked[:limit]), limit=limit)


@dataclass(frozen=True)
class FirstPreferenceDigraph:
    """Directed edges i -> j for every j attaining i's maximum gain."""

    edges: frozenset[tuple[int, int]]

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(j for a, j in self.edges if a == i))

    def mutual_pairs(self) -> list[tuple[int, int]]:
        return sorted(
            (i, j) for i, j in self.edges if i < j and (j, i) in self.edges
        )


def first_preference_digraph(
    graph: ExchangeGraph, state: SlotState, utility: str = "cardinality"
) -> FirstPreferenceDigraph:
    # argmax by union size is argmax by gain for any strictly increasing f.
    masks = [s.mask for s in state.sets]
    edges = set()
    for i in range(graph.m):
        neighbors = graph.neighbors(i)
        if not neighbors:
            continue
        unions = {j: (masks[i] | masks[j]).bit_count() for j in neighbors}
        best = max(unions.values())
        for j in neighbors:
            if unions[j] == best:
                edges.add((i, j))
    return FirstPreferenceDigraph(edges=frozenset(edges))


def _fmt_gain(g) -> str:
    if isinstance(g, float) and g.is_integer():
        return str(int(g))
    return str(g)
