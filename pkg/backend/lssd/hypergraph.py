"""Hypergraph games: r-partite hypergraphs as guessing games, exact matchings
and the matching bounds on p_c and p_ns."""

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .classical import DEFAULT_BUDGET, pc_bruteforce, strategy_value
from .core_model import DeterministicStrategy, JointDistribution, content_lines, read_input
from .errors import BudgetExceededError, EmptyHypergraphError, ParseError, ShapeMismatchError
from .nosignaling import pns_exact
from .simplex import ExactLp, simplex_max

logger = logging.getLogger(__name__)

HYPERGRAPH_HEADER = "lssd-hypergraph v1"
DEFAULT_MAX_EDGES = 24

Edge = Tuple[int, ...]


@dataclass(frozen=True)
class RPartiteHypergraph:
    parts: Tuple[int, ...]
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        if not self.parts or any(n < 1 for n in self.parts):
            raise ShapeMismatchError(f"part sizes must be positive, got {self.parts}")
        seen = set()
        for edge in self.edges:
            if len(edge) != len(self.parts):
                raise ShapeMismatchError(f"edge {edge} does not have one vertex per part")
            if any(not 0 <= v < n for v, n in zip(edge, self.parts)):
                raise ShapeMismatchError(f"edge {edge} has a vertex out of range")
            if edge in seen:
                raise ShapeMismatchError(f"duplicate edge {edge}")
            seen.add(edge)

    @classmethod
    def create(cls, parts: Sequence[int], edges) -> "RPartiteHypergraph":
        """Build from any edge iterable, dropping repeats but keeping first-seen order."""
        unique = list(dict.fromkeys(tuple(int(v) for v in edge) for edge in edges))
        return cls(tuple(int(n) for n in parts), tuple(unique))

    @property
    def r(self) -> int:
        return len(self.parts)

    def disjoint(self, e: Edge, f: Edge) -> bool:
        return all(u != v for u, v in zip(e, f))


def game_distribution(g: RPartiteHypergraph) -> JointDistribution:
    """X is a uniform edge and party i receives its vertex in part i."""
    if not g.edges:
        raise EmptyHypergraphError("hypergraph has no edges")
    weight = Fraction(1, len(g.edges))
    entries = {(e,) + edge: weight for e, edge in enumerate(g.edges)}
    return JointDistribution.from_entries((len(g.edges),) + g.parts, entries)


def is_matching(g: RPartiteHypergraph, edges: Sequence[int]) -> bool:
    return all(g.disjoint(g.edges[i], g.edges[j]) for i, j in itertools.combinations(edges, 2))


def _greedy(g: RPartiteHypergraph) -> List[int]:
    chosen: List[int] = []
    for i, edge in enumerate(g.edges):
        if all(g.disjoint(edge, g.edges[j]) for j in chosen):
            chosen.append(i)
    return chosen


def _cover_bound(g: RPartiteHypergraph, candidates: Sequence[int]) -> int:
    """Fewest distinct vertices any single part needs to touch all candidates."""
    return min(len({g.edges[i][part] for i in candidates}) for part in range(g.r))


def _fractional_value(g: RPartiteHypergraph, edge_indices: Sequence[int]) -> Fraction:
    """Fractional matching LP restricted to the given edges."""
    column = {e: i for i, e in enumerate(edge_indices)}
    lp = ExactLp(len(column))
    lp.objective = {i: Fraction(1) for i in column.values()}
    incident: Dict[Tuple[int, int], List[int]] = {}
    for e, i in column.items():
        for part, v in enumerate(g.edges[e]):
            incident.setdefault((part, v), []).append(i)
    for edges in incident.values():
        lp.add_row({i: 1 for i in edges}, "<=", 1)
    for i in column.values():
        lp.add_row({i: 1}, "<=", 1)
    value, _ = simplex_max(lp)
    return value


def _lp_bound(g: RPartiteHypergraph, candidates: Sequence[int]) -> int:
    return math.floor(_fractional_value(g, candidates))


def max_matching(g: RPartiteHypergraph, max_edges: int = DEFAULT_MAX_EDGES) -> Tuple[int, Tuple[int, ...]]:
    """Exact matching number and a witness (edge indices), by branch and bound.

    A node is pruned when the cheap vertex-cover count or, failing that, the
    floor of the fractional matching on the remaining candidates cannot beat
    the incumbent.
    """
    if len(g.edges) > max_edges:
        raise BudgetExceededError("matching branch and bound", len(g.edges), max_edges)
    best = _greedy(g)
    nodes = 0

    def branch(chosen: List[int], candidates: List[int]) -> None:
        nonlocal best, nodes
        nodes += 1
        if len(chosen) > len(best):
            best = list(chosen)
        if not candidates:
            return
        slack = len(best) - len(chosen)
        if _cover_bound(g, candidates) <= slack or _lp_bound(g, candidates) <= slack:
            return
        first, rest = candidates[0], candidates[1:]
        compatible = [j for j in rest if g.disjoint(g.edges[first], g.edges[j])]
        branch(chosen + [first], compatible)
        branch(chosen, rest)

    branch([], list(range(len(g.edges))))
    logger.debug(f"Matching search visited {nodes} nodes")
    return len(best), tuple(sorted(best))


def subset_matching_oracle(g: RPartiteHypergraph) -> int:
    """Largest pairwise-disjoint edge subset over all 2^|E| subsets."""
    best = 0
    for mask in range(1 << len(g.edges)):
        chosen = [i for i in range(len(g.edges)) if mask >> i & 1]
        if len(chosen) > best and is_matching(g, chosen):
            best = len(chosen)
    return best


def fractional_matching(g: RPartiteHypergraph) -> Fraction:
    """max sum g(e) s.t. sum over edges at each vertex <= 1, 0 <= g(e) <= 1."""
    return _fractional_value(g, range(len(g.edges)))


def matching_strategy(g: RPartiteHypergraph, matching: Sequence[int]) -> DeterministicStrategy:
    """Every matched vertex names its matched edge; unmatched vertices name edge 0."""
    tables = []
    for part, size in enumerate(g.parts):
        table = [0] * size
        for i in matching:
            table[g.edges[i][part]] = i
        tables.append(tuple(table))
    return DeterministicStrategy(tuple(tables))


@dataclass
class Theorem3Report:
    nu: int
    nu_fractional: Fraction
    pc: Fraction
    pns: Fraction
    num_edges: int
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "nu_fractional": str(self.nu_fractional),
            "pc": str(self.pc),
            "pns": str(self.pns),
            "edges": self.num_edges,
            "checks": dict(self.checks),
            "passed": self.passed,
        }


def verify_theorem3(g: RPartiteHypergraph, budget: int = DEFAULT_BUDGET,
                    max_edges: int = DEFAULT_MAX_EDGES, threads: int = 1) -> Theorem3Report:
    """p_c = nu/|E|, p_ns <= nu_f/|E|, nu_f <= (r-1) nu, and p_c = p_ns when r = 2."""
    if g.r < 2:
        raise ShapeMismatchError("matching bounds need at least two parts")
    dist = game_distribution(g)
    nu, witness = max_matching(g, max_edges)
    nu_f = fractional_matching(g)
    pc, _ = pc_bruteforce(dist, budget=budget, threads=threads)
    pns, _ = pns_exact(dist)
    m = len(g.edges)
    report = Theorem3Report(nu, nu_f, pc, pns, m)
    report.checks["witness_is_matching"] = is_matching(g, witness)
    report.checks["matching_strategy_value"] = strategy_value(dist, matching_strategy(g, witness)) == Fraction(nu, m)
    report.checks["pc_equals_nu"] = pc == Fraction(nu, m)
    report.checks["pns_at_most_nu_f"] = pns <= nu_f / m
    report.checks["nu_at_most_nu_f"] = nu <= nu_f
    report.checks["nu_f_at_most_r_minus_1_nu"] = nu_f <= (g.r - 1) * nu
    if g.r == 2:
        report.checks["bipartite_pc_equals_pns"] = pc == pns
    logger.info(f"Matching bounds: nu={nu}, nu_f={nu_f}, p_c={pc}, p_ns={pns}, passed={report.passed}")
    return report


def random_hypergraph(rng: random.Random, parts: Sequence[int], max_edges: int) -> RPartiteHypergraph:
    """Between 1 and ``max_edges`` distinct uniformly drawn edges."""
    count = rng.randint(1, max_edges)
    edges = [tuple(rng.randrange(n) for n in parts) for _ in range(count)]
    return RPartiteHypergraph.create(parts, edges)


def parse_hypergraph(text: str) -> RPartiteHypergraph:
    lines = list(content_lines(text))
    if not lines or " ".join(lines[0][1]) != HYPERGRAPH_HEADER:
        raise ParseError(f"first line must be {HYPERGRAPH_HEADER!r}", lines[0][0] if lines else 1)
    if len(lines) < 2 or lines[1][1][0] != "parts" or len(lines[1][1]) < 2:
        raise ParseError("expected 'parts <n_1> ... <n_r>'", lines[1][0] if len(lines) > 1 else lines[0][0])
    number, tokens = lines[1]
    try:
        parts = tuple(int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError("part sizes must be integers", number) from None
    if any(n < 1 for n in parts):
        raise ParseError("part sizes must be positive", number)
    edges = []
    for number, tokens in lines[2:]:
        if len(tokens) != len(parts):
            raise ParseError(f"edge needs {len(parts)} vertices", number)
        try:
            edge = tuple(int(t) for t in tokens)
        except ValueError:
            raise ParseError("vertices must be integers", number) from None
        if any(not 0 <= v < n for v, n in zip(edge, parts)):
            raise ParseError(f"edge {edge} has a vertex out of range", number)
        if edge in edges:
            logger.warning(f"Dropping duplicate edge {edge} on line {number}")
            continue
        edges.append(edge)
    return RPartiteHypergraph(parts, tuple(edges))


def dump_hypergraph(g: RPartiteHypergraph) -> str:
    lines = [HYPERGRAPH_HEADER, "parts " + " ".join(str(n) for n in g.parts)]
    lines.extend(" ".join(str(v) for v in edge) for edge in g.edges)
    return "\n".join(lines) + "\n"


def load_hypergraph(path) -> RPartiteHypergraph:
    return parse_hypergraph(read_input(path))


def save_hypergraph(g: RPartiteHypergraph, path) -> None:
    Path(path).write_text(dump_hypergraph(g), encoding="utf-8")
