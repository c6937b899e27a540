"""Welfare and regret analytics over traces.

Every average here is an exact rational; decimals appear only when a
report is rendered for display.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .agents import AgentModel, external_regret
from .core import AuctionError, Valuation
from .dynamics import Trace


class InstanceMismatchError(AuctionError):
    """A report was asked to combine a trace with foreign instance data."""


@dataclass(frozen=True)
class WelfareReport:
    average: Fraction          # mean per-round true welfare
    optimum: int               # oracle optimum for the same instance
    ratio: Fraction            # average / optimum (1 when the optimum is 0)
    series: tuple[int, ...]    # per-round true welfare


@dataclass(frozen=True)
class RegretReport:
    per_agent: tuple[Fraction, ...]
    best_fixed: tuple[int, ...]  # hindsight-best candidate bundle per agent


@dataclass(frozen=True)
class ReplicaStats:
    minimum: Fraction
    median: Fraction
    pass_fraction: Fraction


def _build_report(
    trace: Trace, types: Sequence[Valuation], optimum: int, allow_excess: bool
) -> WelfareReport:
    if len(types) != trace.n_agents:
        raise InstanceMismatchError("type profile length differs from the trace")
    series = tuple(r.true_welfare for r in trace.records)
    if series and not allow_excess and max(series) > optimum:
        raise InstanceMismatchError("trace welfare exceeds the claimed optimum")
    if not series:
        return WelfareReport(Fraction(0), optimum, Fraction(1), series)
    average = Fraction(sum(series), len(series))
    ratio = Fraction(1) if optimum == 0 else average / optimum
    return WelfareReport(average, optimum, ratio, series)


def welfare_report(trace: Trace, types: Sequence[Valuation], optimum: int) -> WelfareReport:
    return _build_report(trace, types, optimum, allow_excess=False)


def regret_report(trace: Trace, models: Sequence[AgentModel]) -> RegretReport:
    regrets = []
    bests = []
    for model in models:
        history = trace.history_for(model.index)
        regrets.append(external_regret(history, model, trace.mechanism))
        totals = [Fraction(0)] * len(model.candidate_bids)
        for _, profile in history:
            for k, u in enumerate(
                trace.mechanism.counterfactual_utilities(
                    model.index, model.candidate_bids, profile, model.valuation
                )
            ):
                totals[k] += u
        best_k = max(range(len(totals)), key=lambda k: (totals[k], -k))
        bests.append(model.candidates[best_k])
    return RegretReport(tuple(regrets), tuple(bests))


def coverage_report(
    trace: Trace,
    types: Sequence[Valuation],
    target_alloc: Sequence[int],
    sum_strict: bool = True,
) -> tuple[list[tuple[bool, ...]], tuple[Fraction, ...]]:
    """Per-round, per-agent flag: the opposing bids on the agent's target
    bundle already add up to half his value for it (strict or weak per
    `sum_strict`), or his own standing bid reaches half that value.

    Returns the round-major matrix and the per-agent fraction of rounds.
    """
    if len(types) != trace.n_agents or len(target_alloc) != trace.n_agents:
        raise InstanceMismatchError("instance data differs from the trace")
    n = trace.n_agents
    targets = [types[i].value_of(target_alloc[i]) for i in range(n)]
    matrix: list[tuple[bool, ...]] = []
    counts = [0] * n
    for record in trace.records:
        profile = record.profile
        row = []
        for i in range(n):
            goal = targets[i]
            own = 2 * profile[i].bid >= goal
            if own:
                row.append(True)
                counts[i] += 1
                continue
            pressure = sum(
                d.bid
                for j, d in enumerate(profile)
                if j != i and d.set_mask & target_alloc[i]
            )
            hit = 2 * pressure > goal if sum_strict else 2 * pressure >= goal
            row.append(hit)
            if hit:
                counts[i] += 1
        matrix.append(tuple(row))
    rounds = max(1, trace.rounds)
    return matrix, tuple(Fraction(c, rounds) for c in counts)


def resilience_report(
    trace: Trace,
    types: Sequence[Valuation],
    byzantine: frozenset[int] | set[int],
    restricted_optimum: int,
) -> WelfareReport:
    """Welfare report judged against the optimum restricted to the
    non-byzantine agents; identical to welfare_report when the byzantine
    set is empty and the full optimum is passed.  The ratio may exceed 1,
    since byzantine winnings still count toward realized welfare."""
    if any(i >= trace.n_agents or i < 0 for i in byzantine):
        raise InstanceMismatchError("byzantine set names unknown agents")
    return _build_report(trace, types, restricted_optimum, allow_excess=bool(byzantine))


def hindsight_target_check(
    trace: Trace,
    types: Sequence[Valuation],
    target_alloc: Sequence[int],
    model: AgentModel,
) -> tuple[bool, Fraction]:
    """Average of (value actually won + bid threshold for the agent's target
    bundle) must cover the target value up to the measured regret.  Returns
    (pass, slack)."""
    i = model.index
    if len(types) != trace.n_agents:
        raise InstanceMismatchError("type profile length differs from the trace")
    target = target_alloc[i]
    total = Fraction(0)
    for record in trace.records:
        total += types[i].value_of(record.outcome.allocation[i])
        if target:
            price = trace.mechanism.critical_price(i, target, record.profile, record.coin)
            if price is None:
                raise InstanceMismatchError(
                    f"target bundle {target:#x} is unwinnable for agent {i}"
                )
            total += price[0]
    lhs = total / trace.rounds
    regret = external_regret(trace.history_for(i), model, trace.mechanism)
    rhs = types[i].value_of(target) - regret
    return lhs >= rhs, lhs - rhs


def aggregate(values: Sequence[Fraction], threshold: Fraction) -> ReplicaStats:
    """Replica statistics: minimum, lower median, and the fraction of values
    meeting the threshold."""
    if not values:
        return ReplicaStats(Fraction(0), Fraction(0), Fraction(0))
    ordered = sorted(values)
    passing = sum(1 for v in values if v >= threshold)
    return ReplicaStats(
        ordered[0],
        ordered[(len(ordered) - 1) // 2],
        Fraction(passing, len(values)),
    )
