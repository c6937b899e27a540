"""Bidder behavior engines: undominated bidding, exact best response,
regret-minimizing learners, and byzantine no-overbid bidders.

A bidder's strategy space is the finite candidate list built from his
valuation: the atom bundles plus staying out (mask 0), plus the grand
bundle under the grand-bundle mechanism, where bidding on everything is a
genuinely distinct route.  Every emitted declaration is undominated: the
bid always equals the true value of the chosen set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import EMPTY, Declaration, Profile, ValidationError, Valuation, bundle_key, full_mask
from .mechanisms import GrandBundleMechanism, Mechanism


@dataclass(frozen=True)
class BestResponder:
    """Switches to a strictly better candidate when one exists."""


@dataclass(frozen=True)
class WeightedLearner:
    """Multiplicative-weights learner; `rate` maps the round number to the
    learning rate (default sqrt(8 ln K / t))."""

    rate: Optional[Callable[[int], float]] = None


@dataclass(frozen=True)
class PerturbedLearner:
    """Follow-the-perturbed-leader; `spread` maps the round number to the
    integer perturbation range (default ceil(sqrt(t)) * u_max)."""

    spread: Optional[Callable[[int], int]] = None


@dataclass(frozen=True)
class ByzantineBidder:
    """Arbitrary seeded policy constrained to never bid above true value."""


Behavior = object


@dataclass(frozen=True)
class AgentModel:
    index: int
    valuation: Valuation
    behavior: Behavior
    candidates: tuple[int, ...]
    candidate_bids: tuple[Declaration, ...] = field(default=())

    @property
    def max_value(self) -> int:
        return self.valuation.max_value


def undominated_bid(valuation: Valuation, chosen: int) -> Declaration:
    """The single undominated declaration for a chosen bundle: bid the true
    value; zero-value or empty choices collapse to EMPTY."""
    if chosen == 0:
        return EMPTY
    value = valuation.value_of(chosen)
    if value == 0:
        return EMPTY
    return Declaration(chosen, value)


def candidate_bundles(valuation: Valuation, mechanism: Mechanism | None = None) -> tuple[int, ...]:
    masks = {0}
    masks.update(mask for mask, _ in valuation.atoms)
    if isinstance(mechanism, GrandBundleMechanism) and valuation.max_value > 0:
        masks.add(full_mask(mechanism.item_count))
    return tuple(sorted(masks, key=bundle_key))


def make_agent(
    index: int,
    valuation: Valuation,
    behavior: Behavior,
    mechanism: Mechanism | None = None,
) -> AgentModel:
    cands = candidate_bundles(valuation, mechanism)
    bids = tuple(undominated_bid(valuation, c) for c in cands)
    return AgentModel(index, valuation, behavior, cands, bids)


def counterfactual_utilities(
    model: AgentModel, profile: Profile, mechanism: Mechanism
) -> list:
    """Per-candidate utility of the truthful bid against the round's
    opponents (exact expectation under a randomized mechanism)."""
    return mechanism.counterfactual_utilities(
        model.index, model.candidate_bids, profile, model.valuation
    )


def best_response(
    model: AgentModel,
    profile: Profile,
    mechanism: Mechanism,
    keep_on_tie: bool = True,
) -> Declaration:
    """Utility-maximizing undominated declaration; keeps the current one when
    nothing strictly improves (ties among improvements go to the smaller
    bundle)."""
    i = model.index
    current_utility = mechanism.expected_utility(i, profile[i], profile, model.valuation)
    utilities = counterfactual_utilities(model, profile, mechanism)
    best_k = max(range(len(utilities)), key=lambda k: (utilities[k], -k))
    if keep_on_tie:
        if utilities[best_k] > current_utility:
            return model.candidate_bids[best_k]
        return profile[i]
    if current_utility > utilities[best_k]:
        return profile[i]
    return model.candidate_bids[best_k]


def byzantine_bid(model: AgentModel, rng) -> Declaration:
    """Uniform candidate bundle with a uniform bid in [0, true value]."""
    masks = [c for c in model.candidates if c]
    if not masks:
        return EMPTY
    mask = masks[rng.randrange(len(masks))]
    ceiling = model.valuation.value_of(mask)
    bid = rng.randint(0, ceiling)
    if bid == 0:
        return EMPTY
    return Declaration(mask, bid)


def external_regret(
    history: Sequence[tuple[Declaration, Profile]],
    model: AgentModel,
    mechanism: Mechanism,
) -> Fraction:
    """Per-round average shortfall against the best fixed candidate in
    hindsight; exact, may be negative."""
    if not history:
        raise ValidationError("regret needs at least one round of history")
    i, valuation = model.index, model.valuation
    realized = Fraction(0)
    fixed = [Fraction(0)] * len(model.candidate_bids)
    for own, profile in history:
        realized += mechanism.expected_utility(i, own, profile, valuation)
        for k, u in enumerate(
            mechanism.counterfactual_utilities(i, model.candidate_bids, profile, valuation)
        ):
            fixed[k] += u
    return Fraction(max(fixed) - realized, len(history))


class WeightedLearnerState:
    """Multiplicative-weights state: positive float weights drive sampling,
    cumulative utilities stay exact."""

    def __init__(self, n_candidates: int, u_max: int, rate: Callable[[int], float] | None = None):
        self.weights = [1.0] * n_candidates
        self.cumulative = [0] * n_candidates
        self.rounds = 0
        self.u_max = u_max
        self.rate = rate

    def _rate(self, t: int) -> float:
        if self.rate is not None:
            return self.rate(t)
        k = len(self.weights)
        if k < 2:
            return 0.0
        return math.sqrt(8.0 * math.log(k) / t)

    def choose(self, rng) -> int:
        total = sum(self.weights)
        pick = rng.random() * total
        acc = 0.0
        for k, w in enumerate(self.weights):
            acc += w
            if pick < acc:
                return k
        return len(self.weights) - 1

    def update(self, utilities: Sequence) -> None:
        self.rounds += 1
        eta = self._rate(self.rounds)
        scale = self.u_max
        for k, u in enumerate(utilities):
            self.cumulative[k] += u
            if u and eta and scale:
                self.weights[k] *= math.exp(eta * float(u) / scale)
        # Renormalize occasionally so long runs cannot overflow the floats.
        top = max(self.weights)
        if top > 1e250:
            self.weights = [w / top for w in self.weights]


class PerturbedLearnerState:
    """Follow-the-perturbed-leader state: argmax of cumulative utility plus a
    fresh uniform integer perturbation, ties to the smaller bundle."""

    def __init__(self, n_candidates: int, u_max: int, spread: Callable[[int], int] | None = None):
        self.cumulative = [0] * n_candidates
        self.rounds = 0
        self.u_max = u_max
        self.spread = spread

    def _spread(self, t: int) -> int:
        if self.spread is not None:
            return self.spread(t)
        return math.ceil(math.sqrt(t)) * self.u_max

    def choose(self, rng) -> int:
        width = self._spread(self.rounds + 1)
        best_k, best_score = 0, None
        for k, c in enumerate(self.cumulative):
            score = c + (rng.randint(0, width) if width > 0 else 0)
            if best_score is None or score > best_score:
                best_k, best_score = k, score
        return best_k

    def update(self, utilities: Sequence) -> None:
        self.rounds += 1
        for k, u in enumerate(utilities):
            self.cumulative[k] += u


def learner_state_for(model: AgentModel):
    if isinstance(model.behavior, WeightedLearner):
        return WeightedLearnerState(len(model.candidates), model.max_value, model.behavior.rate)
    if isinstance(model.behavior, PerturbedLearner):
        return PerturbedLearnerState(len(model.candidates), model.max_value, model.behavior.spread)
    raise ValidationError(f"agent {model.index} has no learner behavior")
