"""Partial stable matching over (possibly truncated) preference lists.

This is the per-slot pairing kernel shared by the deterministic algorithms:
a deterministic proposal protocol in the style of stable-roommates Phase 1,
restricted to mutually listed node pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graph import ExchangeGraph, PreferenceList


class InconsistentListsError(ValueError):
    """A preference list names a neighbor without an underlying GT edge."""


@dataclass(frozen=True)
class Matching:
    """Disjoint node pairs plus the leftover unmatched nodes.

    `lists` keeps the truncated preference lists the matching was computed
    from, so stability can be re-checked against the exact same evidence.
    """

    pairs: frozenset[tuple[int, int]]
    unmatched: frozenset[int]
    lists: tuple[PreferenceList, ...] | None = None

    def partner(self, i: int) -> int | None:
        for a, b in self.pairs:
            if a == i:
                return b
            if b == i:
                return a
        return None

    def render(self) -> str:
        parts = [f"({a},{b})" for a, b in sorted(self.pairs)]
        tail = " ".join(map(str, sorted(self.unmatched))) if self.unmatched else "none"
        parts.append(f"unmatched: {tail}")
        return "; ".join(parts)


def find_stable_matching(
    lists: Sequence[PreferenceList], graph: ExchangeGraph | None = None
) -> Matching:
    """Compute a partial stable matching from per-node truncated lists.

    Protocol: one-directional entries (i lists j but j truncated i away) can
    never pair and are pruned first.  Nodes are then processed in ascending
    id order in rounds; each free node proposes down its list; a proposee
    holds the best proposal seen so far (ties keep the lower id, which is
    the list order) and rejects worse ones, a rejection removing the pair
    from both lists.  At the fixpoint, mutually held proposals become pairs.

    When `graph` is given, an entry without a corresponding GT edge raises
    InconsistentListsError; list truncation asymmetry is not an error.
    """
    m = len(lists)
    order: list[list[int]] = [[j for j, _ in pl.ranked] for pl in lists]

    if graph is not None:
        for i in range(m):
            row = set(graph.neighbors(i))
            for j in order[i]:
                if j not in row:
                    raise InconsistentListsError(
                        f"node {i} lists {j} but the GT edge ({i},{j}) does not exist"
                    )

    listed: list[set[int]] = [set(row) for row in order]
    order = [[j for j in order[i] if i in listed[j]] for i in range(m)]
    pos: list[dict[int, int]] = [
        {j: p for p, j in enumerate(row)} for row in order
    ]

    removed: list[set[int]] = [set() for _ in range(m)]
    ptr = [0] * m
    target: list[int | None] = [None] * m   # j currently holding i's proposal
    holder: list[int | None] = [None] * m   # proposer currently held by j

    progress = True
    while progress:
        progress = False
        for i in range(m):
            if target[i] is not None:
                continue
            while ptr[i] < len(order[i]):
                j = order[i][ptr[i]]
                if j in removed[i]:
                    ptr[i] += 1
                    continue
                h = holder[j]
                if h is None or pos[j][i] < pos[j][h]:
                    if h is not None:
                        removed[h].add(j)
                        removed[j].add(h)
                        target[h] = None
                    holder[j] = i
                    target[i] = j
                    progress = True
                    break
                removed[i].add(j)
                removed[j].add(i)
                progress = True

    pairs = frozenset(
        (i, t) for i, t in enumerate(target) if t is not None and i < t and target[t] == i
    )
    paired = {x for p in pairs for x in p}
    return Matching(
        pairs=pairs,
        unmatched=frozenset(range(m)) - paired,
        lists=tuple(lists),
    )


def verify_stability(
    lists: Sequence[PreferenceList], matching: Matching
) -> tuple[int, int] | None:
    """Exhaustively scan mutually listed pairs for a blocking pair.

    A pair (i, j) blocks when each is on the other's list and each strictly
    prefers the other (by list position, which encodes gain-descending with
    id tie-break) to its assigned partner, or has no partner.  Returns the
    first blocking pair in (owner id, list order) scan order, or None.
    """
    m = len(lists)
    pos = [{j: p for p, (j, _) in enumerate(pl.ranked)} for pl in lists]

    partner: dict[int, int] = {}
    seen: set[int] = set()
    for a, b in matching.pairs:
        for x in (a, b):
            if x in seen:
                raise ValueError(f"node {x} appears in two pairs")
            seen.add(x)
        partner[a], partner[b] = b, a
    overlap = seen & matching.unmatched
    if overlap:
        raise ValueError(f"nodes both paired and unmatched: {sorted(overlap)}")
    if seen | matching.unmatched != set(range(m)):
        raise ValueError("pairs and unmatched do not partition the node set")
    for a, b in matching.pairs:
        if b not in pos[a] or a not in pos[b]:
            raise ValueError(f"pair ({a},{b}) is not mutually listed")

    def strictly_prefers(i: int, j: int) -> bool:
        p = partner.get(i)
        return p is None or pos[i][j] < pos[i][p]

    for i in range(m):
        for j, _ in lists[i].ranked:
            if i not in pos[j]:
                continue
            if strictly_prefers(i, j) and strictly_prefers(j, i):
                return (i, j)
    return None
