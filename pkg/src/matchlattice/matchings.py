"""Matchings, exact incidence matrices, and the stability test.

A matching is stored as one bitmask of matched workers per firm; the
worker-side view is derived from it, so the two sides can never disagree.
Probability matrices keep every entry as an exact :class:`~fractions.Fraction`
-- the decomposition and all golden values in this domain are exact
fractions, and floating point would break the equality tests downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import ValidationError
from .prefs import AgentId, Market, Side, mask_subset

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Matching:
    """An assignment of workers to firms, symmetric across sides."""

    firm_masks: tuple[int, ...]
    num_workers: int
    worker_masks: tuple[int, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        limit = 1 << self.num_workers
        for mask in self.firm_masks:
            if not 0 <= mask < limit:
                raise ValidationError("worker index outside the market", code="unknown-agent")
        derived = [0] * self.num_workers
        for i, mask in enumerate(self.firm_masks):
            rest = mask
            while rest:
                low = rest & -rest
                derived[low.bit_length() - 1] |= 1 << i
                rest ^= low
        object.__setattr__(self, "worker_masks", tuple(derived))

    @classmethod
    def from_edges(cls, num_firms: int, num_workers: int, edges: Iterable[tuple[int, int]]) -> "Matching":
        masks = [0] * num_firms
        for firm, worker in edges:
            if not 0 <= firm < num_firms:
                raise ValidationError(f"firm index {firm} outside the market", code="unknown-agent")
            if not 0 <= worker < num_workers:
                raise ValidationError(f"worker index {worker} outside the market", code="unknown-agent")
            masks[firm] |= 1 << worker
        return cls(tuple(masks), num_workers)

    @classmethod
    def from_firm_sets(cls, num_workers: int, firm_sets: Iterable[Iterable[int]]) -> "Matching":
        sets = [frozenset(s) for s in firm_sets]
        return cls.from_edges(len(sets), num_workers, [(i, w) for i, s in enumerate(sets) for w in s])

    @classmethod
    def from_worker_masks(cls, num_firms: int, worker_masks: tuple[int, ...]) -> "Matching":
        firm = [0] * num_firms
        for j, mask in enumerate(worker_masks):
            if not 0 <= mask < (1 << num_firms):
                raise ValidationError("firm index outside the market", code="unknown-agent")
            rest = mask
            while rest:
                low = rest & -rest
                firm[low.bit_length() - 1] |= 1 << j
                rest ^= low
        return cls(tuple(firm), len(worker_masks))

    @classmethod
    def empty(cls, num_firms: int, num_workers: int) -> "Matching":
        return cls((0,) * num_firms, num_workers)

    @property
    def num_firms(self) -> int:
        return len(self.firm_masks)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.num_firms, self.num_workers)

    def firm_set(self, firm: int) -> frozenset[int]:
        return mask_subset(self.firm_masks[firm])

    def worker_set(self, worker: int) -> frozenset[int]:
        return mask_subset(self.worker_masks[worker])

    def assigned(self, agent: AgentId) -> frozenset[int]:
        """The partners matched to ``agent`` (empty when unmatched)."""
        if agent.side is Side.FIRMS:
            return self.firm_set(agent.index)
        return self.worker_set(agent.index)

    def assigned_mask(self, agent: AgentId) -> int:
        if agent.side is Side.FIRMS:
            return self.firm_masks[agent.index]
        return self.worker_masks[agent.index]

    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (i, j) for i, mask in enumerate(self.firm_masks) for j in mask_subset(mask)
        )

    def incidence(self) -> "RationalMatrix":
        """The 0/1 firm-by-worker matrix of this matching."""
        return RationalMatrix(
            tuple(
                tuple(ONE if mask >> j & 1 else ZERO for j in range(self.num_workers))
                for mask in self.firm_masks
            )
        )

    def __repr__(self) -> str:
        rows = "; ".join(
            f"f{i + 1}:{{{','.join('w%d' % (j + 1) for j in sorted(self.firm_set(i)))}}}"
            for i in range(self.num_firms)
        )
        return f"Matching({rows})"


@dataclass(frozen=True)
class RationalMatrix:
    """A firm-by-worker grid of exact probabilities in [0, 1]."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        width = len(self.rows[0]) if self.rows else 0
        for row in self.rows:
            if len(row) != width:
                raise ValidationError("matrix rows must have equal length")
            for entry in row:
                if not isinstance(entry, Fraction) or entry < 0 or entry > 1:
                    raise ValidationError(f"matrix entry {entry!r} outside [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def entry(self, firm: int, worker: int) -> Fraction:
        return self.rows[firm][worker]

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, ZERO) for row in self.rows)

    def col_sums(self) -> tuple[Fraction, ...]:
        if not self.rows:
            return ()
        return tuple(sum(row[j] for row in self.rows) for j in range(len(self.rows[0])))

    def support(self) -> frozenset[tuple[int, int]]:
        """Cells with strictly positive probability."""
        return frozenset(
            (i, j) for i, row in enumerate(self.rows) for j, e in enumerate(row) if e > 0
        )


BlockingWitness = Union[AgentId, tuple[AgentId, AgentId]]


def find_blocking(matching: Matching, market: Market) -> Optional[BlockingWitness]:
    """Return why ``matching`` is unstable, or ``None`` if it is stable.

    The witness is either a single agent whose assignment it would reject
    (an individual-rationality failure) or a ``(firm, worker)`` pair that
    would rather be matched with each other.
    """
    if matching.shape != market.shape:
        raise ValidationError(
            f"matching shape {matching.shape} does not fit market {market.shape}",
            code="mismatched-market",
        )
    for i, pref in enumerate(market.firm_prefs):
        if pref.choice_mask(matching.firm_masks[i]) != matching.firm_masks[i]:
            return AgentId(Side.FIRMS, i)
    for j, pref in enumerate(market.worker_prefs):
        if pref.choice_mask(matching.worker_masks[j]) != matching.worker_masks[j]:
            return AgentId(Side.WORKERS, j)
    for i, fpref in enumerate(market.firm_prefs):
        fmask = matching.firm_masks[i]
        for j, wpref in enumerate(market.worker_prefs):
            if fmask >> j & 1:
                continue
            if not fpref.choice_mask(fmask | (1 << j)) >> j & 1:
                continue
            if wpref.choice_mask(matching.worker_masks[j] | (1 << i)) >> i & 1:
                return (AgentId(Side.FIRMS, i), AgentId(Side.WORKERS, j))
    return None


def is_stable(matching: Matching, market: Market) -> bool:
    """True iff no agent and no firm-worker pair blocks ``matching``."""
    return find_blocking(matching, market) is None
