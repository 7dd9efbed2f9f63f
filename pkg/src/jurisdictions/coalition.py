"""Egalitarian evaluation of coalitions.

Every member of a coalition S bears the same total burden
``c(S) = (g(S) + D(S)) / |S|``; agent i's tax share is ``c(S)`` minus its own
transport cost, so shares can be negative (subsidies) and sum to ``g(S)``.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterator

import numpy as np

from .location import min_transport_cost, optimal_location, transport_costs
from .model import Coalition, CoalitionEvaluation, Instance, InstanceTooLarge

MAX_ENUM_AGENTS = 20


def project_cost(coalition: Coalition, instance: Instance) -> float:
    instance.check_coalition(coalition)
    return instance.project_cost(coalition.mask, len(coalition))


def egalitarian_cost(coalition: Coalition, instance: Instance) -> float:
    return (project_cost(coalition, instance) + min_transport_cost(coalition, instance)) / len(coalition)


def evaluate(coalition: Coalition, instance: Instance) -> CoalitionEvaluation:
    loc = optimal_location(coalition, instance)
    g = project_cost(coalition, instance)
    c = (g + loc.transport_total) / len(coalition)
    d = transport_costs(instance.coalition_points(coalition), np.array(loc.location), instance.alpha)
    shares = {i: c - float(di) for i, di in zip(coalition.members, d)}
    return CoalitionEvaluation(coalition, loc.location, loc.transport_total, g, c, shares)


def _guard(instance: Instance, limit: int = MAX_ENUM_AGENTS) -> None:
    if instance.n > limit:
        raise InstanceTooLarge(f"{instance.n} agents exceeds the exhaustive limit of {limit}")


def enumerate_coalitions(instance: Instance) -> Iterator[Coalition]:
    """All nonempty coalitions in ascending bitmask order."""
    _guard(instance)
    return (Coalition(m) for m in range(1, 1 << instance.n))


@lru_cache(maxsize=16)
def cost_table(instance: Instance) -> np.ndarray:
    """``c(S)`` for every bitmask S; entry 0 is ``nan``.

    Cached per instance; the returned array is read-only.
    """
    _guard(instance)
    out = np.full(1 << instance.n, np.nan)
    for c in enumerate_coalitions(instance):
        out[c.mask] = egalitarian_cost(c, instance)
    out.setflags(write=False)
    return out


def rank_coalitions(instance: Instance) -> list[tuple[Coalition, float]]:
    """Coalitions by ascending ``c(S)``, ties broken by ascending bitmask.

    Every agent ranks coalitions this way, so this is the common ranking.
    """
    costs = cost_table(instance)
    order = np.argsort(costs[1:], kind="stable") + 1
    return [(Coalition(int(m)), float(costs[m])) for m in order]
