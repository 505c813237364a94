"""Shared fixtures: the golden 4x4 market, its lotteries, and the generated
responsive-market corpus used by the property and acceptance tests."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import pytest

from matchlattice import (
    AgentId,
    Lottery,
    Market,
    Matching,
    RankedPreference,
    Side,
    StableSet,
    enumerate_stable,
    generate_responsive_market,
)

DATA_DIR = Path(__file__).parent / "data"

# The golden market: four firms and four workers, each ranking four pairs and
# then the four singletons, in rotated orders.
FIRM_RANKINGS = (
    ((0, 1), (0, 2), (1, 3), (2, 3), (0,), (1,), (2,), (3,)),
    ((2, 3), (1, 3), (0, 2), (0, 1), (2,), (3,), (0,), (1,)),
    ((0, 2), (2, 3), (0, 1), (1, 3), (0,), (2,), (1,), (3,)),
    ((1, 3), (0, 1), (2, 3), (0, 2), (1,), (3,), (0,), (2,)),
)
WORKER_RANKINGS = (
    ((1, 3), (1, 2), (0, 3), (0, 2), (1,), (3,), (2,), (0,)),
    ((1, 2), (0, 2), (1, 3), (0, 3), (1,), (2,), (0,), (3,)),
    ((0, 3), (1, 3), (0, 2), (1, 2), (0,), (3,), (1,), (2,)),
    ((0, 2), (0, 3), (1, 2), (1, 3), (0,), (2,), (3,), (1,)),
)

# The four reference stable matchings of the golden market (firm rows).
TABLE_ROWS = (
    ((0, 1), (2, 3), (0, 2), (1, 3)),
    ((0, 2), (1, 3), (2, 3), (0, 1)),
    ((1, 3), (0, 2), (0, 1), (2, 3)),
    ((2, 3), (0, 1), (1, 3), (0, 2)),
)


def build_example_market() -> Market:
    return Market(
        tuple(
            RankedPreference(AgentId(Side.FIRMS, i), 4, ranking)
            for i, ranking in enumerate(FIRM_RANKINGS)
        ),
        tuple(
            RankedPreference(AgentId(Side.WORKERS, j), 4, ranking)
            for j, ranking in enumerate(WORKER_RANKINGS)
        ),
    )


def table_matchings() -> tuple[Matching, ...]:
    return tuple(Matching.from_firm_sets(4, rows) for rows in TABLE_ROWS)


@pytest.fixture(scope="session")
def example_market() -> Market:
    return build_example_market()


@pytest.fixture(scope="session")
def example_stable(example_market) -> StableSet:
    return enumerate_stable(example_market)


@pytest.fixture(scope="session")
def nus() -> tuple[Matching, Matching, Matching, Matching]:
    """The reference matchings nu1..nu4 of the golden market."""
    return table_matchings()


@pytest.fixture(scope="session")
def raw_x(nus) -> Lottery:
    """The golden lottery in its original two-term form."""
    return Lottery.from_pairs([(Fraction(3, 4), nus[1]), (Fraction(1, 4), nus[2])])


@pytest.fixture(scope="session")
def canonical_x(nus) -> Lottery:
    """The same lottery in decreasing form."""
    return Lottery.from_pairs(
        [(Fraction(1, 4), nus[0]), (Fraction(1, 2), nus[1]), (Fraction(1, 4), nus[3])]
    )


@pytest.fixture(scope="session")
def canonical_y(nus) -> Lottery:
    return Lottery.from_pairs(
        [(Fraction(1, 6), nus[0]), (Fraction(1, 2), nus[2]), (Fraction(1, 3), nus[3])]
    )


@dataclass(frozen=True)
class MarketCase:
    """One generated market with its stable set and sampled lotteries."""

    seed: int
    market: Market
    stable: StableSet
    lotteries: tuple[Lottery, ...]


def random_lottery(rng: random.Random, stable: StableSet) -> Lottery:
    """A lottery over up to four distinct stable matchings with random
    integer weights, normalised exactly."""
    count = rng.randint(1, min(4, len(stable)))
    picks = rng.sample(range(len(stable)), count)
    raw = [rng.randint(1, 6) for _ in picks]
    total = sum(raw)
    return Lottery.from_pairs(
        [(Fraction(n, total), stable[i]) for n, i in zip(raw, picks)]
    ).merged()


def build_corpus(num_markets: int = 130, lotteries_each: int = 5) -> list[MarketCase]:
    cases = []
    for seed in range(num_markets):
        rng = random.Random(10_000 + seed)
        num_firms = rng.randint(2, 4)
        num_workers = num_firms if rng.random() < 0.75 else rng.randint(2, 4)
        doc = generate_responsive_market(seed, num_firms, num_workers, max_quota=2)
        market = doc.build_market()
        stable = enumerate_stable(market)
        lotteries = tuple(random_lottery(rng, stable) for _ in range(lotteries_each))
        cases.append(MarketCase(seed, market, stable, lotteries))
    return cases


@pytest.fixture(scope="session")
def corpus() -> list[MarketCase]:
    return build_corpus()
