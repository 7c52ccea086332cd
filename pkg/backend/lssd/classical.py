"""Classical simultaneous-guessing value p_c, exact over the rationals."""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .core_model import DeterministicStrategy, JointDistribution, check_alpha
from .errors import BudgetExceededError, ShapeMismatchError

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10 ** 8


def support_outputs(dist: JointDistribution, party: int) -> Tuple[Tuple[int, ...], ...]:
    """Outputs worth considering for each input of ``party``.

    An output x is dropped at input a when P_{X A_i}(x, a) = 0 while P_{A_i}(a) > 0.
    Inputs that never occur keep the single output 0.
    """
    marginal = dist.party_marginal(party)
    allowed = []
    for a in range(dist.party_sizes[party]):
        outputs = tuple(x for x in range(dist.x_size) if marginal[x][a])
        allowed.append(outputs or (0,))
    return tuple(allowed)


def strategy_value(dist: JointDistribution, strat: DeterministicStrategy) -> Fraction:
    if len(strat.tables) != dist.num_parties:
        raise ShapeMismatchError(f"strategy has {len(strat.tables)} tables for {dist.num_parties} parties")
    for i, (table, size) in enumerate(zip(strat.tables, dist.party_sizes)):
        if len(table) != size:
            raise ShapeMismatchError(f"table {i} has length {len(table)}, expected {size}")
        if any(not 0 <= x < dist.x_size for x in table):
            raise ShapeMismatchError(f"table {i} has outputs outside [0, {dist.x_size})")
    total = Fraction(0)
    for index, p in dist.support():
        x = index[0]
        if all(x == out for out in strat.outputs(index[1:])):
            total += p
    return total


class _BestResponseSearch:
    """Enumerate parties 0..r-2 and answer with the last party's exact best response.

    For a fixed prefix the value is a sum over the last party's inputs, so the
    per-input maximum (smallest output on ties) gives the lexicographically first
    optimal completion.
    """

    def __init__(self, dist: JointDistribution):
        self.dist = dist
        self.allowed = [support_outputs(dist, i) for i in range(dist.num_parties)]
        last = dist.num_parties - 1
        self.by_last_input: List[List[Tuple[int, Tuple[int, ...], Fraction]]] = [
            [] for _ in range(dist.party_sizes[last])
        ]
        for index, p in dist.support():
            self.by_last_input[index[-1]].append((index[0], index[1:-1], p))

    def prefix_spaces(self):
        return [itertools.product(*allowed) for allowed in self.allowed[:-1]]

    def best_response(self, prefix: Sequence[Tuple[int, ...]]) -> Tuple[Fraction, Tuple[int, ...]]:
        total = Fraction(0)
        response = []
        for b, entries in enumerate(self.by_last_input):
            scores = {}
            for x, inputs, p in entries:
                if all(table[a] == x for table, a in zip(prefix, inputs)):
                    scores[x] = scores.get(x, 0) + p
            best_x, best = self.allowed[-1][b][0], Fraction(-1)
            for x in self.allowed[-1][b]:
                score = scores.get(x, Fraction(0))
                if score > best:
                    best_x, best = x, score
            total += best
            response.append(best_x)
        return total, tuple(response)

    def search(self, first_tables) -> Tuple[Optional[Fraction], Optional[DeterministicStrategy]]:
        best_value, best_strat = None, None
        rest = self.prefix_spaces()[1:]
        for first in first_tables:
            for others in itertools.product(*rest):
                prefix = (first,) + others
                value, response = self.best_response(prefix)
                if best_value is None or value > best_value:
                    best_value = value
                    best_strat = DeterministicStrategy(prefix + (response,))
        return best_value, best_strat


def strategy_space_size(dist: JointDistribution) -> int:
    """Number of pruned deterministic strategy tuples."""
    return math.prod(
        len(outputs) for i in range(dist.num_parties) for outputs in support_outputs(dist, i)
    )


def pc_bruteforce(dist: JointDistribution, budget: int = DEFAULT_BUDGET,
                  threads: int = 1) -> Tuple[Fraction, DeterministicStrategy]:
    """Exact classical value and the lexicographically first maximizer."""
    required = strategy_space_size(dist)
    if required > budget:
        raise BudgetExceededError("classical enumeration", required, budget)
    search = _BestResponseSearch(dist)
    logger.info(f"Enumerating {required} strategy tuples over {dist.num_parties} parties")

    if dist.num_parties == 1:
        value, response = search.best_response(())
        return value, DeterministicStrategy((response,))

    first_tables = list(search.prefix_spaces()[0])
    shard_count = max(1, min(threads, len(first_tables)))
    size = -(-len(first_tables) // shard_count)
    shards = [first_tables[i:i + size] for i in range(0, len(first_tables), size)]
    if len(shards) == 1:
        results = [search.search(shards[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            results = list(pool.map(search.search, shards))

    best_value, best_strat = None, None
    for value, strat in results:
        if value is not None and (best_value is None or value > best_value):
            best_value, best_strat = value, strat
    logger.info(f"Classical value {best_value} with strategy {best_strat.tables}")
    return best_value, best_strat


def pc_binary_closed_form(dist: JointDistribution) -> Fraction:
    """max over s != t of max{P_X(s), P(s,0,0)+P(t,1,1), P(s,0,1)+P(t,1,0)}."""
    if dist.num_parties != 2 or dist.party_sizes != (2, 2) or dist.x_size < 2:
        raise ShapeMismatchError(f"closed form needs |X| >= 2 and binary inputs, got alphabets {dist.alphabets}")
    p_x = dist.marginal_x()
    best = Fraction(0)
    for s, t in itertools.permutations(range(dist.x_size), 2):
        best = max(
            best,
            p_x[s],
            dist[(s, 0, 0)] + dist[(t, 1, 1)],
            dist[(s, 0, 1)] + dist[(t, 1, 0)],
        )
    return best


def example1_pc(alpha) -> Fraction:
    """Classical value of the noisy-bit game: (1 - alpha)^2 below 1 - 1/sqrt(2), else 1/2."""
    alpha = check_alpha(alpha)
    if 2 * (1 - alpha) ** 2 >= 1:
        return (1 - alpha) ** 2
    return Fraction(1, 2)


def example1_product_value(alpha) -> Fraction:
    """Value on two noisy-bit copies when both output (1, 1) on input (1, 1) and (0, 0) otherwise."""
    alpha = check_alpha(alpha)
    return Fraction(1, 4) * (1 - alpha ** 2) ** 2 + Fraction(1, 4) * (1 - alpha) ** 4


def example1_product_strategy() -> DeterministicStrategy:
    """The strategy behind example1_product_value, in product_game's pair encoding."""
    table = tuple(3 if a == 3 else 0 for a in range(4))
    return DeterministicStrategy((table, table))
