"""Core and Nash stability for the egalitarian game.

Strict inequalities on costs are tested with the margin ``DELTA``: a
coalition blocks, or an agent deviates, only when the gain exceeds it.
"""
from __future__ import annotations

import itertools
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterator

import numpy as np

from .coalition import _guard, cost_table, egalitarian_cost
from .model import (
    DELTA,
    NEW_SINGLETON,
    Coalition,
    DeviationMove,
    DynamicsTrace,
    Instance,
    Partition,
    StepLimitExceeded,
    canonical_partition,
    partition_from_labels,
)

MAX_PARTITION_AGENTS = 12
CHUNK = 20_000


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """Set partitions of n items as restricted growth strings, lexicographically.

    ``a[0] = 0`` and ``a[j] <= max(a[:j]) + 1``; block k of the partition is
    ``{i : a[i] == k}``, so blocks come out ordered by smallest member.
    """
    if n < 1:
        return
    a = [0] * n
    top = [0] * n  # top[j] = max(a[:j])
    while True:
        yield tuple(a)
        j = n - 1
        while j > 0 and a[j] == top[j] + 1:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        hi = max(top[j], a[j])
        for k in range(j + 1, n):
            a[k] = 0
            top[k] = hi


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


# --------------------------------------------------------------------------
# core


def greedy_core_sequence(instance: Instance) -> list[tuple[Coalition, float]]:
    """The blocks T1, T2, ... in selection order, with their costs.

    Each round takes the cheapest coalition among agents not yet placed,
    ties going to the lowest bitmask.
    """
    costs = cost_table(instance)
    masks = np.arange(costs.shape[0])
    remaining = (1 << instance.n) - 1
    chosen = []
    while remaining:
        feasible = (masks | remaining) == remaining
        feasible[0] = False
        m = int(np.argmin(np.where(feasible, costs, np.inf)))
        chosen.append((Coalition(m), float(costs[m])))
        remaining &= ~m
    return chosen


def greedy_core_partition(instance: Instance) -> Partition:
    return canonical_partition((c for c, _ in greedy_core_sequence(instance)), instance.n)


def _member_min(agent_cost: np.ndarray) -> np.ndarray:
    """For every bitmask T, the minimum of ``agent_cost`` over members of T."""
    n = agent_cost.shape[0]
    out = np.full(1 << n, np.inf)
    for i in range(n):
        bit = 1 << i
        view = out.reshape(-1, 2, bit)
        np.minimum(view[:, 1, :], agent_cost[i], out=view[:, 1, :])
    return out


def _first_blocker(labels, costs: np.ndarray) -> int:
    """Lowest blocking bitmask for the partition given by ``labels``, or 0."""
    masks = {}
    for i, lab in enumerate(labels):
        masks[lab] = masks.get(lab, 0) | (1 << i)
    agent_cost = np.array([costs[masks[lab]] for lab in labels])
    with np.errstate(invalid="ignore"):
        blocked = costs < _member_min(agent_cost) - DELTA
    m = int(np.argmax(blocked))
    return m if blocked[m] else 0


def find_blocking_coalition(partition: Partition, instance: Instance) -> Coalition | None:
    _check_partition(partition, instance)
    m = _first_blocker(partition.labels(), cost_table(instance))
    return Coalition(m) if m else None


def is_core_stable(partition: Partition, instance: Instance) -> bool:
    return find_blocking_coalition(partition, instance) is None


def all_core_stable_partitions(instance: Instance, jobs: int = 1) -> list[Partition]:
    _guard(instance, MAX_PARTITION_AGENTS)
    hits = []
    for found, _ in _scan(instance, "core", jobs):
        hits.extend(found)
    return [partition_from_labels(lab) for lab in hits]


# --------------------------------------------------------------------------
# Nash


def _memo_cost(instance: Instance) -> Callable[[int], float]:
    memo: dict[int, float] = {}

    def cost(mask: int) -> float:
        if mask not in memo:
            memo[mask] = egalitarian_cost(Coalition(mask), instance)
        return memo[mask]

    return cost


def _agent_deviations(agent: int, masks: list[int], cost: Callable[[int], float]) -> list[DeviationMove]:
    bit = 1 << (agent - 1)
    home = next(m for m in masks if m & bit)
    old = cost(home)
    out = []
    if home != bit:
        new = cost(bit)
        if new < old - DELTA:
            out.append(DeviationMove(agent, Coalition(home), NEW_SINGLETON, old, new))
    for m in sorted(masks):
        if m == home:
            continue
        new = cost(m | bit)
        if new < old - DELTA:
            out.append(DeviationMove(agent, Coalition(home), Coalition(m), old, new))
    return out


def check_nash(partition: Partition, instance: Instance) -> list[DeviationMove]:
    """All strictly improving single-agent deviations; empty iff Nash stable.

    Moving alone is tested against ``c({i})``, which equals ``g({i})``.
    """
    _check_partition(partition, instance)
    cost = _memo_cost(instance)
    masks = [b.mask for b in partition.blocks]
    moves = []
    for i in range(1, instance.n + 1):
        moves.extend(_agent_deviations(i, masks, cost))
    return moves


def is_nash_stable(partition: Partition, instance: Instance) -> bool:
    return not check_nash(partition, instance)


def _nash_ok(labels, costs: np.ndarray) -> bool:
    masks = {}
    for i, lab in enumerate(labels):
        masks[lab] = masks.get(lab, 0) | (1 << i)
    blocks = list(masks.values())
    for i, lab in enumerate(labels):
        bit = 1 << i
        home = masks[lab]
        limit = costs[home] - DELTA
        if home != bit and costs[bit] < limit:
            return False
        for m in blocks:
            if m != home and costs[m | bit] < limit:
                return False
    return True


def nash_search(instance: Instance, jobs: int = 1) -> tuple[Partition | None, int]:
    """First Nash-stable partition in canonical order and the number examined."""
    _guard(instance, MAX_PARTITION_AGENTS)
    examined = 0
    for found, count in _scan(instance, "nash", jobs):
        if found:
            return partition_from_labels(found[0]), examined + count
        examined += count
    return None, examined


def find_nash_stable(instance: Instance, jobs: int = 1) -> Partition | None:
    return nash_search(instance, jobs)[0]


# --------------------------------------------------------------------------
# exhaustive scans, optionally fanned out over processes

_WORKER_COSTS: np.ndarray | None = None


def _init_worker(costs: np.ndarray) -> None:
    global _WORKER_COSTS
    _WORKER_COSTS = costs


def _scan_chunk(kind: str, chunk: list, costs: np.ndarray | None = None):
    costs = _WORKER_COSTS if costs is None else costs
    if kind == "core":
        return [lab for lab in chunk if not _first_blocker(lab, costs)], len(chunk)
    for k, lab in enumerate(chunk):
        if _nash_ok(lab, costs):
            return [lab], k + 1
    return [], len(chunk)


def _chunks(n: int):
    it = restricted_growth_strings(n)
    while True:
        chunk = list(itertools.islice(it, CHUNK))
        if not chunk:
            return
        yield chunk


def _scan(instance: Instance, kind: str, jobs: int):
    """Yield ``(hits, count)`` per chunk, in canonical order."""
    costs = cost_table(instance)
    if jobs <= 1:
        for chunk in _chunks(instance.n):
            yield _scan_chunk(kind, chunk, costs)
        return
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(np.array(costs),)) as pool:
        pending: deque = deque()
        try:
            for chunk in _chunks(instance.n):
                pending.append(pool.submit(_scan_chunk, kind, chunk))
                if len(pending) >= 2 * jobs:
                    yield pending.popleft().result()
            while pending:
                yield pending.popleft().result()
        finally:
            pool.shutdown(cancel_futures=True)


# --------------------------------------------------------------------------
# dynamics


def _best_move(moves: list[DeviationMove]) -> DeviationMove:
    def key(mv):
        if mv.to_block is NEW_SINGLETON:
            return (mv.new_cost, 0, 0)
        return (mv.new_cost, 1, mv.to_block.mask)

    return min(moves, key=key)


def apply_move(partition: Partition, move: DeviationMove) -> Partition:
    bit = 1 << (move.agent - 1)
    blocks = []
    for b in partition.blocks:
        m = b.mask & ~bit
        if move.to_block is not NEW_SINGLETON and b.mask == move.to_block.mask:
            m |= bit
        if m:
            blocks.append(Coalition(m))
    if move.to_block is NEW_SINGLETON:
        blocks.append(Coalition(bit))
    return canonical_partition(blocks, partition.n)


def best_response_dynamics(instance: Instance, initial: Partition, max_steps: int = 1000) -> DynamicsTrace:
    """Run single-agent improving moves until a fixed point or a repeated state.

    Agents are scanned in ascending id; the first one with an improving move
    takes its cheapest destination (a new singleton wins ties, then the
    lowest target bitmask). Raises :class:`StepLimitExceeded`, carrying the
    partial trace, if neither happens within ``max_steps`` moves.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    _check_partition(initial, instance)
    cost = _memo_cost(instance)
    trace = DynamicsTrace([initial], [])
    seen = {initial: 0}
    state = initial
    while True:
        masks = [b.mask for b in state.blocks]
        move = None
        for i in range(1, instance.n + 1):
            options = _agent_deviations(i, masks, cost)
            if options:
                move = _best_move(options)
                break
        if move is None:
            trace.terminal = "fixed_point"
            return trace
        if len(trace.moves) >= max_steps:
            raise StepLimitExceeded(trace)
        state = apply_move(state, move)
        trace.moves.append(move)
        trace.states.append(state)
        if state in seen:
            trace.terminal = "cycle"
            trace.cycle_start = seen[state]
            return trace
        seen[state] = len(trace.states) - 1


def _check_partition(partition: Partition, instance: Instance) -> None:
    if partition.n != instance.n:
        raise ValueError(f"partition covers {partition.n} agents but the instance has {instance.n}")
