"""Shared helpers: random states/instances and an independent brute-force
stability checker (kept separate from the library's own verify_stability).
"""

from __future__ import annotations

import numpy as np

from segswap.graph import build_exchange_graph, preference_list
from segswap.model import SegmentSet, SlotState, make_instance


def random_state(rng, m=None, n=None, max_m=8, max_n=8) -> SlotState:
    """A slot state with arbitrary nonempty sets (full sets allowed), for
    graph/matching properties that do not need A2-valid instances."""
    if m is None:
        m = int(rng.integers(2, max_m + 1))
    if n is None:
        n = int(rng.integers(2, max_n + 1))
    sets = [SegmentSet(n, int(rng.integers(1, 1 << n))) for _ in range(m)]
    return SlotState(slot=1, sets=sets, downloads=[0] * m)


def random_valid_instance(rng, max_m=8, max_n=8, sap=0.0, pef=1.0):
    m = int(rng.integers(2, max_m + 1))
    n = int(rng.integers(2, max_n + 1))
    lo = -(-n // m)  # coverage needs m*k >= n
    k = int(rng.integers(max(1, lo), n))
    return make_instance(m, n, k, rng, sap=sap, pef=pef)


def lists_for(state: SlotState, pef: float, utility: str = "cardinality"):
    graph = build_exchange_graph(state)
    lists = [preference_list(i, graph, state, pef, utility) for i in range(state.m)]
    return graph, lists


def blocking_pairs(lists, pairs) -> list[tuple[int, int]]:
    """Every mutually listed (i, j) where both strictly prefer each other to
    their assigned partner (or are unmatched).  Independent re-derivation."""
    pos = [{j: p for p, (j, _) in enumerate(pl.ranked)} for pl in lists]
    partner: dict[int, int] = {}
    for a, b in pairs:
        partner[a], partner[b] = b, a
    out = []
    for i in range(len(lists)):
        for j in pos[i]:
            if j <= i or i not in pos[j]:
                continue
            pi = partner.get(i)
            pj = partner.get(j)
            if (pi is None or pos[i][j] < pos[i][pi]) and (
                pj is None or pos[j][i] < pos[j][pj]
            ):
                out.append((i, j))
    return out


def all_stable_matchings(lists) -> list[frozenset]:
    """Enumerate every pairing over mutually listed edges and keep the stable
    ones.  Exponential; only for small m."""
    m = len(lists)
    pos = [{j for j, _ in pl.ranked} for pl in lists]
    edges = [(i, j) for i in range(m) for j in pos[i] if i < j and i in pos[j]]
    out = []

    def rec(idx, used, chosen):
        if idx == len(edges):
            if not blocking_pairs(lists, chosen):
                out.append(frozenset(chosen))
            return
        rec(idx + 1, used, chosen)
        i, j = edges[idx]
        if i not in used and j not in used:
            rec(idx + 1, used | {i, j}, chosen + [(i, j)])

    rec(0, frozenset(), [])
    return out


def seeded(*entropy) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))
