"""Repeated-game engines: concurrent regret-minimization rounds and
one-agent-per-round best-response rounds, with trace recording and cycle
detection.

Randomness is split into fixed streams derived from the run seed: one for
the updater order, one for mechanism coins, one per agent (learner
sampling and byzantine policies), and one for non-empty starts.  Identical
configs therefore produce bit-identical traces.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .agents import (
    AgentModel,
    BestResponder,
    ByzantineBidder,
    PerturbedLearner,
    WeightedLearner,
    best_response,
    byzantine_bid,
    counterfactual_utilities,
    learner_state_for,
)
from .core import EMPTY, Declaration, Outcome, Profile, ValidationError, social_welfare
from .mechanisms import COIN_NONE, Coin, FilteredGreedyMechanism, GrandBundleMechanism, Mechanism

ALL_AGENTS = -1  # updater marker for concurrent (regret) rounds


def seeded_rng(seed: int, *tags) -> random.Random:
    """Deterministic stream derivation, stable across platforms and runs."""
    digest = hashlib.sha256(repr((seed,) + tags).encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass(frozen=True)
class RoundRecord:
    round: int
    updater: int  # agent index, or ALL_AGENTS for concurrent rounds
    profile: Profile
    coin: Coin
    outcome: Outcome
    declared_welfare: int
    true_welfare: int


@dataclass
class Trace:
    mechanism: Mechanism
    agents: tuple[AgentModel, ...]
    seed: int
    kind: str
    records: tuple[RoundRecord, ...] = ()

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def rounds(self) -> int:
        return len(self.records)

    def profiles(self) -> list[Profile]:
        return [r.profile for r in self.records]

    def history_for(self, agent: int) -> list[tuple[Declaration, Profile]]:
        return [(r.profile[agent], r.profile) for r in self.records]


@dataclass
class RunConfig:
    mechanism: Mechanism
    agents: list[AgentModel]
    rounds: int
    seed: int = 0
    empty_start: bool = True
    keep_on_tie: bool = True
    scripted_order: Optional[list[int]] = None
    replicas: int = 1
    epsilon: Fraction = Fraction(1, 10)
    initial_profile: Optional[Profile] = None

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValidationError("a run needs at least one round")
        if self.replicas < 1:
            raise ValidationError("replica count must be positive")
        needs_lottery = isinstance(
            self.mechanism, (FilteredGreedyMechanism, GrandBundleMechanism)
        )
        if not self.empty_start and needs_lottery and self.mechanism.lottery is None:
            raise ValidationError(
                "random starts on filtered mechanisms require the grand-bundle lottery"
            )
        if self.scripted_order is not None:
            if not self.scripted_order:
                raise ValidationError("scripted order must not be empty")
            n = len(self.agents)
            for a in self.scripted_order:
                if not 0 <= a < n:
                    raise ValidationError(f"scripted order names unknown agent {a}")


def _starting_profile(config: RunConfig) -> Profile:
    if config.initial_profile is not None:
        if len(config.initial_profile) != len(config.agents):
            raise ValidationError("initial profile length must match the agent count")
        return tuple(config.initial_profile)
    if config.empty_start:
        return tuple(EMPTY for _ in config.agents)
    rng = seeded_rng(config.seed, "init")
    picks = []
    for model in config.agents:
        k = rng.randrange(len(model.candidates))
        picks.append(model.candidate_bids[k])
    return tuple(picks)


def _true_welfare(allocation, agents: Sequence[AgentModel]) -> int:
    return social_welfare(allocation, [a.valuation for a in agents])


def run_best_response_dynamics(config: RunConfig) -> Trace:
    """One uniformly random agent per round switches to a best response
    (scripted orders override the draw); the mechanism coin is drawn per
    round and the realized outcome recorded."""
    mechanism = config.mechanism
    agents = config.agents
    n = len(agents)
    rng_order = seeded_rng(config.seed, "order")
    rng_coin = seeded_rng(config.seed, "coin")
    agent_rngs = [seeded_rng(config.seed, "agent", i) for i in range(n)]

    profile = _starting_profile(config)
    records = []
    for t in range(1, config.rounds + 1):
        if n == 0:
            records.append(
                RoundRecord(t, ALL_AGENTS, (), COIN_NONE, Outcome((), ()), 0, 0)
            )
            continue
        if config.scripted_order is not None:
            updater = config.scripted_order[(t - 1) % len(config.scripted_order)]
        else:
            updater = rng_order.randrange(n)
        model = agents[updater]
        if isinstance(model.behavior, ByzantineBidder):
            new_decl = byzantine_bid(model, agent_rngs[updater])
        else:
            new_decl = best_response(model, profile, mechanism, config.keep_on_tie)
        if new_decl != profile[updater]:
            profile = tuple(
                new_decl if j == updater else d for j, d in enumerate(profile)
            )
        coin = mechanism.draw_coin(rng_coin, n)
        outcome = mechanism.outcome(profile, coin)
        records.append(
            RoundRecord(
                t,
                updater,
                profile,
                coin,
                outcome,
                sum(d.value_on(m) for d, m in zip(profile, outcome.allocation)),
                _true_welfare(outcome.allocation, agents),
            )
        )
    return Trace(mechanism, tuple(agents), config.seed, "best-response", tuple(records))


def scripted_order_mode(config: RunConfig, order: Sequence[int]) -> Trace:
    """Best-response dynamics with updaters taken from `order` (cycled)."""
    if not order:
        raise ValidationError("scripted order must not be empty")
    cfg = RunConfig(
        mechanism=config.mechanism,
        agents=config.agents,
        rounds=config.rounds,
        seed=config.seed,
        empty_start=config.empty_start,
        keep_on_tie=config.keep_on_tie,
        scripted_order=list(order),
        replicas=config.replicas,
        epsilon=config.epsilon,
        initial_profile=config.initial_profile,
    )
    return run_best_response_dynamics(cfg)


def run_regret_dynamics(config: RunConfig) -> Trace:
    """Every learner samples a candidate and submits its undominated bid
    simultaneously; after the round each learner receives the full
    counterfactual utility vector against the just-played opponents."""
    mechanism = config.mechanism
    agents = config.agents
    n = len(agents)
    for model in agents:
        if isinstance(model.behavior, BestResponder):
            raise ValidationError(
                f"agent {model.index}: regret dynamics needs learner or byzantine behaviors"
            )
    rng_coin = seeded_rng(config.seed, "coin")
    agent_rngs = [seeded_rng(config.seed, "agent", i) for i in range(n)]
    learners = {
        i: learner_state_for(m)
        for i, m in enumerate(agents)
        if isinstance(m.behavior, (WeightedLearner, PerturbedLearner))
    }

    records = []
    for t in range(1, config.rounds + 1):
        decls = []
        for i, model in enumerate(agents):
            if i in learners:
                k = learners[i].choose(agent_rngs[i])
                decls.append(model.candidate_bids[k])
            else:
                decls.append(byzantine_bid(model, agent_rngs[i]))
        profile = tuple(decls)
        coin = mechanism.draw_coin(rng_coin, n)
        outcome = mechanism.outcome(profile, coin)
        for i, state in learners.items():
            state.update(counterfactual_utilities(agents[i], profile, mechanism))
        records.append(
            RoundRecord(
                t,
                ALL_AGENTS,
                profile,
                coin,
                outcome,
                sum(d.value_on(m) for d, m in zip(profile, outcome.allocation)),
                _true_welfare(outcome.allocation, agents),
            )
        )
    return Trace(mechanism, tuple(agents), config.seed, "regret", tuple(records))


def detect_cycle(trace: Trace) -> Optional[tuple[int, int]]:
    """Smallest period p such that the profile sequence repeats with period p
    from some round onward, having observed at least two full periods.
    Returns (period, first round of the periodic tail) or None."""
    profiles = trace.profiles()
    total = len(profiles)
    for period in range(1, total // 2 + 1):
        last_mismatch = -1
        for t in range(total - period - 1, -1, -1):
            if profiles[t] != profiles[t + period]:
                last_mismatch = t
                break
        start = last_mismatch + 1
        if total - start >= 2 * period:
            return period, start + 1  # rounds are 1-based
    return None


def constant_tail_start(trace: Trace) -> int:
    """1-based round where the maximal trailing stretch of identical profiles
    begins (equals the round count when the last round still changed)."""
    profiles = trace.profiles()
    for t in range(len(profiles) - 1, 0, -1):
        if profiles[t] != profiles[t - 1]:
            return t + 1
    return 1


def replica_seeds(seed: int, replicas: int) -> list[int]:
    """Stable per-replica seeds derived from the run seed."""
    return [
        int.from_bytes(hashlib.sha256(repr((seed, "replica", r)).encode()).digest()[:8], "big")
        for r in range(replicas)
    ]
