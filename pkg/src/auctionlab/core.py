"""Domain primitives for combinatorial-auction experiments.

Bundles are plain int bitmasks over item indices 0..m-1, values are
non-negative integer ticks, and every comparison is exact.  Bundles are
totally ordered "smaller sets first": by popcount, then by mask value.
All types here are immutable and safe to share across replicas.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

MAX_ITEMS = 32


class AuctionError(Exception):
    """Base class for every error raised by this package."""


class FeasibilityError(AuctionError):
    """An allocation overlaps or breaks a cardinality cap."""


class SizeError(AuctionError):
    """An instance is too large for the exact solvers."""


class ValidationError(AuctionError):
    """A file, profile, or configuration failed validation."""


def full_mask(item_count: int) -> int:
    """Bitmask of all items of an instance with `item_count` items."""
    if not 0 <= item_count <= MAX_ITEMS:
        raise ValidationError(f"item count must be in [0, {MAX_ITEMS}], got {item_count}")
    return (1 << item_count) - 1


def bundle_from_items(items: Iterable[int], item_count: int) -> int:
    mask = 0
    for j in items:
        if not 0 <= j < item_count:
            raise ValidationError(f"item index {j} out of range for {item_count} items")
        mask |= 1 << j
    return mask


def bundle_items(mask: int) -> tuple[int, ...]:
    """Item indices present in a bundle, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def bundle_key(mask: int) -> tuple[int, int]:
    """Total-order key: fewer items first, then lower mask value."""
    return (mask.bit_count(), mask)


@dataclass(frozen=True)
class Declaration:
    """A single-minded bid: `bid` ticks for any superset of `set_mask`.

    The empty declaration is ``Declaration(0, 0)`` (module constant EMPTY);
    it is the canonical form of every zero-value bid.  Any other declaration
    must name a non-empty set and bid at least one tick.
    """

    set_mask: int
    bid: int

    def __post_init__(self) -> None:
        if self.set_mask == 0 and self.bid == 0:
            return
        if self.set_mask == 0 or self.bid < 1:
            raise ValidationError(
                f"declaration must be empty or (non-empty set, bid >= 1), "
                f"got mask={self.set_mask:#x} bid={self.bid}"
            )

    @property
    def is_empty(self) -> bool:
        return self.set_mask == 0

    def value_on(self, mask: int) -> int:
        """Declared value of an arbitrary bundle (bid iff it covers the set)."""
        if self.set_mask and self.set_mask & ~mask == 0:
            return self.bid
        return 0


EMPTY = Declaration(0, 0)


def single_minded(set_mask: int, bid: int) -> Declaration:
    """Build a declaration, canonicalizing zero bids and empty sets to EMPTY."""
    if bid < 0:
        raise ValidationError(f"bid must be non-negative, got {bid}")
    if set_mask == 0 or bid == 0:
        return EMPTY
    return Declaration(set_mask, bid)


class Valuation:
    """Explicit bundle values with max-over-contained-subsets semantics.

    ``atoms`` is a canonical tuple of (bundle mask, positive value) pairs,
    sorted by bundle order, with distinct bundles.  The value of an
    arbitrary bundle is the maximum atom value over atoms it contains
    (0 if none), which makes every valuation monotone and normalized.
    """

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[tuple[int, int]] = ()):
        cleaned: dict[int, int] = {}
        for mask, value in atoms:
            if value < 0:
                raise ValidationError(f"atom value must be non-negative, got {value}")
            if mask == 0 and value > 0:
                raise ValidationError("the empty bundle must have value 0")
            if value == 0:
                continue
            if mask in cleaned:
                raise ValidationError(f"duplicate atom bundle {mask:#x}")
            cleaned[mask] = value
        self.atoms: tuple[tuple[int, int], ...] = tuple(
            sorted(cleaned.items(), key=lambda a: bundle_key(a[0]))
        )

    def value_of(self, mask: int) -> int:
        best = 0
        for s, v in self.atoms:
            if s & ~mask == 0 and v > best:
                best = v
        return best

    def best_bundle(self) -> tuple[int, int]:
        """Argmax-value bundle, smaller bundles first on ties; (0, 0) if worthless."""
        best_mask, best_value = 0, 0
        for s, v in self.atoms:  # atoms already in bundle order
            if v > best_value:
                best_mask, best_value = s, v
        return best_mask, best_value

    @property
    def max_value(self) -> int:
        return max((v for _, v in self.atoms), default=0)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Valuation) and self.atoms == other.atoms

    def __hash__(self) -> int:
        return hash(self.atoms)

    def __repr__(self) -> str:
        return f"Valuation({list(self.atoms)!r})"


ZERO_VALUATION = Valuation(())

# A profile is one declaration per agent; indices are agent identities.
Profile = tuple[Declaration, ...]
Bid = Union[Declaration, Valuation]


def feasible(allocation: Sequence[int], cap: int | None = None) -> bool:
    """True iff bundles are pairwise disjoint and respect the cardinality cap."""
    used = 0
    for mask in allocation:
        if mask & used:
            return False
        if cap is not None and mask.bit_count() > cap:
            return False
        used |= mask
    return True


def check_feasible(allocation: Sequence[int], cap: int | None = None) -> None:
    if not feasible(allocation, cap):
        raise FeasibilityError(f"infeasible allocation {tuple(allocation)} (cap={cap})")


def social_welfare(
    allocation: Sequence[int], types: Sequence[Valuation], cap: int | None = None
) -> int:
    """Total true value of a feasible allocation."""
    check_feasible(allocation, cap)
    return sum(t.value_of(mask) for mask, t in zip(allocation, types))


def declared_welfare(allocation: Sequence[int], profile: Sequence[Declaration]) -> int:
    return sum(d.value_on(mask) for mask, d in zip(allocation, profile))


@dataclass(frozen=True)
class Outcome:
    """A feasible allocation plus per-agent payments in ticks."""

    allocation: tuple[int, ...]
    payments: tuple[int, ...]

    def __post_init__(self) -> None:
        for mask, pay in zip(self.allocation, self.payments):
            if pay < 0:
                raise ValidationError("payments must be non-negative")
            if mask == 0 and pay != 0:
                raise ValidationError("losers must pay zero")

    def utility(self, agent: int, valuation: Valuation) -> int:
        return valuation.value_of(self.allocation[agent]) - self.payments[agent]
