"""Full simulation runs of the four pairing algorithms.

lspa: per-slot stable matching on PEF-truncated lists, SAP downloads for the
unmatched.  pepa: lspa with all SAP forced to 0.  lfs: pepa with all PEF
forced to 1.  randomized: mutual uniform random picks, no downloads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import ExchangeGraph, build_exchange_graph, preference_list
from .matching import find_stable_matching
from .model import (
    ConstantSchedule,
    Instance,
    InvalidParameterError,
    Schedule,
    SegmentSet,
    SlotState,
    universe_mask,
)

ALGORITHMS = ("lspa", "pepa", "lfs", "randomized")

_BLOCK_MIN = 16
_BLOCK_MAX = 65_536


@dataclass(frozen=True)
class SlotEvents:
    """What happened in one slot: disjoint GT exchanges, then downloads."""

    activations: tuple[tuple[int, int], ...]
    downloads: tuple[tuple[int, int], ...]

    @property
    def is_empty(self) -> bool:
        return not self.activations and not self.downloads


@dataclass
class Trace:
    """One full run: sparse per-slot events plus the terminal state.

    r_end counts executed slots; after it, no pair satisfies GT and no node
    can still act (unless `truncated`, in which case the slot cap was hit).
    Slots without events are not recorded.
    """

    instance: Instance
    events: tuple[tuple[int, SlotEvents], ...]
    r_end: int
    truncated: bool
    final: SlotState

    def aggregate(self) -> int:
        return self.final.aggregate()

    def total_downloads(self) -> int:
        return self.final.total_downloads()

    def event_log(self) -> str:
        """Line-oriented log: `slot r: exchange i j` / `slot r: download i s`."""
        lines = []
        for slot, ev in self.events:
            for i, j in ev.activations:
                lines.append(f"slot {slot}: exchange {i} {j}")
            for i, s in ev.downloads:
                lines.append(f"slot {slot}: download {i} {s}")
        return "\n".join(lines)


def _apply_downloads(
    state: SlotState,
    saps: tuple[Schedule, ...],
    rng: np.random.Generator,
    unmatched,
) -> list[tuple[int, int]]:
    """SAP branch: each unmatched deficient node downloads one uniformly
    random missing segment with probability sap.

    Processed in ascending node id.  The Bernoulli draw consumes the rng
    stream only for 0 < sap < 1; sap 0 and 1 are decided without a draw.
    """
    n = state.sets[0].n
    full = universe_mask(n)
    out = []
    for i in sorted(unmatched):
        mask = state.sets[i].mask
        if mask == full:
            continue
        p = saps[i].value(state.slot)
        if p <= 0.0:
            continue
        if p < 1.0 and rng.random() >= p:
            continue
        missing = [s for s in range(n) if not mask >> s & 1]
        seg = missing[int(rng.integers(len(missing)))]
        state.sets[i] = SegmentSet(n, mask | 1 << seg)
        state.downloads[i] += 1
        out.append((i, seg))
    return out


def _deterministic_slot(
    state: SlotState,
    inst: Instance,
    rng: np.random.Generator,
    graph: ExchangeGraph,
    saps: tuple[Schedule, ...],
    pefs: tuple[Schedule, ...],
) -> SlotEvents:
    slot = state.slot
    lists = [
        preference_list(i, graph, state, pefs[i].value(slot), inst.utility)
        for i in range(inst.m)
    ]
    matching = find_stable_matching(lists, graph)

    # All matched pairs exchange simultaneously against slot-start sets;
    # pairs are disjoint so the unions can be applied in any order.
    activations = sorted(matching.pairs)
    unions = [state.sets[i].mask | state.sets[j].mask for i, j in activations]
    for (i, j), u in zip(activations, unions):
        merged = SegmentSet(inst.n, u)
        state.sets[i] = merged
        state.sets[j] = merged

    downloads = _apply_downloads(state, saps, rng, matching.unmatched)
    state.slot += 1
    return SlotEvents(activations=tuple(activations), downloads=tuple(downloads))


def step_deterministic(
    state: SlotState, inst: Instance, rng: np.random.Generator
) -> SlotEvents:
    """One slot of Limited Stable Pairing: matching, exchanges, downloads.

    Mutates `state` in place (sets, download counters, slot index) and
    returns the slot's events.  Uses the instance's own schedules.
    """
    graph = build_exchange_graph(state)
    return _deterministic_slot(state, inst, rng, graph, inst.sap_schedules, inst.pef_schedules)


def _draw_picks(rng: np.random.Generator, m: int) -> np.ndarray:
    """Each node picks a uniformly random target among the other m-1 nodes."""
    d = rng.integers(0, m - 1, size=m)
    return d + (d >= np.arange(m))


def _apply_mutual_picks(state: SlotState, picks) -> SlotEvents:
    """Exchange every pair with mutual selection and GT at slot start."""
    n = state.sets[0].n
    masks = [s.mask for s in state.sets]
    activations = []
    for i, j in enumerate(picks):
        j = int(j)
        if j <= i or int(picks[j]) != i:
            continue
        u = masks[i] | masks[j]
        if u != masks[i] and u != masks[j]:
            activations.append((i, j))
    for i, j in activations:
        merged = SegmentSet(n, masks[i] | masks[j])
        state.sets[i] = merged
        state.sets[j] = merged
    return SlotEvents(activations=tuple(activations), downloads=())


def step_randomized(
    state: SlotState, inst: Instance, rng: np.random.Generator
) -> SlotEvents:
    """One slot of the randomized algorithm; never downloads."""
    events = _apply_mutual_picks(state, _draw_picks(rng, inst.m))
    state.slot += 1
    return events


def _effective_schedules(inst: Instance, algorithm: str):
    zero = (ConstantSchedule(0.0),) * inst.m
    one = (ConstantSchedule(1.0),) * inst.m
    if algorithm == "lspa":
        return inst.sap_schedules, inst.pef_schedules
    if algorithm == "pepa":
        return zero, inst.pef_schedules
    if algorithm == "lfs":
        return zero, one
    raise InvalidParameterError(f"unknown algorithm {algorithm!r}; known: {ALGORITHMS}")


def run_simulation(
    inst: Instance,
    algorithm: str,
    seed=None,
    max_slots: int | None = None,
) -> Trace:
    """Run one algorithm to quiescence (or to the slot cap).

    Deterministic algorithms terminate when the exchange graph is empty and
    no deficient node can ever act again (its SAP schedule is provably zero
    from the current slot on); the randomized algorithm terminates when the
    exchange graph is empty.  `max_slots` defaults to 50*n*m; hitting it
    sets the truncated flag instead of raising.  Deterministic given
    (inst, algorithm, seed).
    """
    if algorithm not in ALGORITHMS:
        raise InvalidParameterError(f"unknown algorithm {algorithm!r}; known: {ALGORITHMS}")
    if max_slots is None:
        max_slots = 50 * inst.n * inst.m
    rng = np.random.default_rng(seed)
    state = SlotState.initial(inst, rng=rng)
    if algorithm == "randomized":
        return _run_randomized(inst, state, rng, max_slots)
    saps, pefs = _effective_schedules(inst, algorithm)
    return _run_deterministic(inst, state, rng, max_slots, saps, pefs)


def _run_deterministic(inst, state, rng, max_slots, saps, pefs) -> Trace:
    m, n = inst.m, inst.n
    full = universe_mask(n)
    masks = [s.mask for s in state.sets]
    adj: list[set[int]] = [set() for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            u = masks[i] | masks[j]
            if u != masks[i] and u != masks[j]:
                adj[i].add(j)
                adj[j].add(i)

    events: list[tuple[int, SlotEvents]] = []
    while True:
        slot = state.slot
        graph_empty = not any(adj)
        if graph_empty and all(
            masks[i] == full or saps[i].is_zero_from(slot) for i in range(m)
        ):
            r_end, truncated = slot - 1, False
            break
        if slot > max_slots:
            r_end, truncated = max_slots, True
            break

        if graph_empty:
            # Download-only slot: nobody is matched, no lists to build.
            downloads = _apply_downloads(state, saps, rng, range(m))
            state.slot += 1
            ev = SlotEvents(activations=(), downloads=tuple(downloads))
        else:
            graph = ExchangeGraph(
                slot=slot, adjacency=tuple(tuple(sorted(row)) for row in adj)
            )
            ev = _deterministic_slot(state, inst, rng, graph, saps, pefs)

        if not ev.is_empty:
            events.append((slot, ev))
            changed = {x for pair in ev.activations for x in pair}
            changed.update(i for i, _ in ev.downloads)
            for c in changed:
                masks[c] = state.sets[c].mask
            for c in changed:
                a = masks[c]
                for j in range(m):
                    if j == c:
                        continue
                    u = a | masks[j]
                    if u != a and u != masks[j]:
                        adj[c].add(j)
                        adj[j].add(c)
                    else:
                        adj[c].discard(j)
                        adj[j].discard(c)

    return Trace(
        instance=inst,
        events=tuple(events),
        r_end=r_end,
        truncated=truncated,
        final=state,
    )


def _run_randomized(inst, state, rng, max_slots) -> Trace:
    """Blocked engine: slots are drawn in adaptively sized batches and only
    the first slot that activates an exchange is applied; the remaining
    drawn-but-unused slots are discarded and redrawn, which preserves the
    process law since slots are iid and change nothing unless they activate.
    """
    m, n = inst.m, inst.n
    masks = [s.mask for s in state.sets]
    gt = np.zeros((m, m), dtype=bool)
    for i in range(m):
        a = masks[i]
        for j in range(i + 1, m):
            u = a | masks[j]
            if u != a and u != masks[j]:
                gt[i, j] = gt[j, i] = True

    ids = np.arange(m)
    events: list[tuple[int, SlotEvents]] = []
    r = 1
    block = _BLOCK_MIN
    truncated = False
    while True:
        if not gt.any():
            r_end = r - 1
            break
        if r > max_slots:
            r_end, truncated = max_slots, True
            break
        size = min(block, max_slots - r + 1)
        d = rng.integers(0, m - 1, size=(size, m))
        picks = d + (d >= ids)
        mutual = np.take_along_axis(picks, picks, axis=1) == ids
        active = mutual & gt[ids, picks]
        hit = active.any(axis=1)
        if not hit.any():
            r += size
            block = min(block * 2, _BLOCK_MAX)
            continue
        b = int(np.argmax(hit))
        slot = r + b
        row = picks[b]
        pairs = [(i, int(row[i])) for i in np.nonzero(active[b])[0] if i < row[i]]
        for i, j in pairs:
            u = masks[i] | masks[j]
            masks[i] = masks[j] = u
        events.append((slot, SlotEvents(activations=tuple(pairs), downloads=())))
        changed = {x for pair in pairs for x in pair}
        for c in changed:
            a = masks[c]
            for j in range(m):
                u = a | masks[j]
                gt[c, j] = gt[j, c] = j != c and u != a and u != masks[j]
        r = slot + 1
        block = _BLOCK_MIN

    state.sets = [SegmentSet(n, mask) for mask in masks]
    state.slot = r_end + 1
    return Trace(
        instance=inst,
        events=tuple(events),
        r_end=r_end,
        truncated=truncated,
        final=state,
    )


def randomized_trajectory(inst: Instance, epochs: int, seed=None) -> list[float]:
    """Mean per-node cardinality at the start of slots 1..epochs under the
    randomized algorithm (the empirical counterpart of the recurrence
    predictor)."""
    if epochs < 1:
        raise InvalidParameterError(f"epochs must be >= 1, got {epochs}")
    rng = np.random.default_rng(seed)
    state = SlotState.initial(inst, rng=rng)
    out = []
    for _ in range(epochs):
        out.append(state.aggregate() / inst.m)
        step_randomized(state, inst, rng)
    return out
