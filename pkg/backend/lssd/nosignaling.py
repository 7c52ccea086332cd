"""No-signaling value p_ns: exact LP over the no-signaling polytope, Q^k boxes
and the binary-input permutation formula."""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .classical import pc_binary_closed_form, support_outputs
from .core_model import (
    JointDistribution,
    content_lines,
    format_rational,
    parse_rational,
    read_input,
)
from .errors import (
    BudgetExceededError,
    KOutOfRangeError,
    NegativeEntryError,
    NotNormalizedError,
    ParseError,
    ShapeMismatchError,
    SignalingError,
    ValidationError,
)
from .simplex import ExactLp, simplex_max

logger = logging.getLogger(__name__)

BOX_HEADER = "lssd-box v1"
DEFAULT_PERMUTATION_MAX_D = 5

# largest integer weight sum that float64 assignment handles exactly
_EXACT_FLOAT_LIMIT = 2 ** 50


@dataclass(frozen=True)
class NoSignalingBox:
    """Q(x_1..x_r | a_1..a_r) with every output port over the same alphabet.

    ``alphabets`` is ``(|X|, |A_1|, ..., |A_r|)``; ``entries`` is row-major over
    ``(x_1, ..., x_r, a_1, ..., a_r)``.
    """

    alphabets: Tuple[int, ...]
    entries: Tuple[Fraction, ...]

    @property
    def num_parties(self) -> int:
        return len(self.alphabets) - 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.alphabets[0],) * self.num_parties + tuple(self.alphabets[1:])

    def _offset(self, outputs: Sequence[int], inputs: Sequence[int]) -> int:
        offset = 0
        for i, size in zip(tuple(outputs) + tuple(inputs), self.shape):
            offset = offset * size + i
        return offset

    def __call__(self, outputs: Sequence[int], inputs: Sequence[int]) -> Fraction:
        return self.entries[self._offset(outputs, inputs)]

    def input_tuples(self) -> Iterator[Tuple[int, ...]]:
        return itertools.product(*(range(n) for n in self.alphabets[1:]))

    def output_tuples(self) -> Iterator[Tuple[int, ...]]:
        return itertools.product(range(self.alphabets[0]), repeat=self.num_parties)

    def support(self) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...], Fraction]]:
        for outputs in self.output_tuples():
            for inputs in self.input_tuples():
                q = self(outputs, inputs)
                if q:
                    yield outputs, inputs, q

    @classmethod
    def from_function(cls, alphabets: Sequence[int], fn) -> "NoSignalingBox":
        alphabets = tuple(alphabets)
        r = len(alphabets) - 1
        entries = []
        for index in itertools.product(*(range(n) for n in (alphabets[0],) * r + alphabets[1:])):
            entries.append(Fraction(fn(index[:r], index[r:])))
        return cls(alphabets, tuple(entries))


def marginal(box: NoSignalingBox, parties: Sequence[int], inputs: Sequence[int]) -> Dict[Tuple[int, ...], Fraction]:
    """Output distribution of ``parties`` given the full input tuple."""
    totals: Dict[Tuple[int, ...], Fraction] = {}
    for outputs in box.output_tuples():
        key = tuple(outputs[i] for i in parties)
        totals[key] = totals.get(key, Fraction(0)) + box(outputs, inputs)
    return totals


def validate_box(box: NoSignalingBox) -> bool:
    r = box.num_parties
    if r < 1 or any(n < 1 for n in box.alphabets):
        raise ShapeMismatchError(f"bad box alphabets {box.alphabets}")
    if len(box.entries) != math.prod(box.shape):
        raise ShapeMismatchError(f"box has {len(box.entries)} entries, expected {math.prod(box.shape)}")
    for outputs in box.output_tuples():
        for inputs in box.input_tuples():
            q = box(outputs, inputs)
            if q < 0:
                raise NegativeEntryError(outputs + inputs, q)
    for inputs in box.input_tuples():
        total = sum((box(outputs, inputs) for outputs in box.output_tuples()), Fraction(0))
        if total != 1:
            raise NotNormalizedError(total, where=f"box row for inputs {inputs}")
    for size in range(1, r):
        for parties in itertools.combinations(range(r), size):
            for inputs in box.input_tuples():
                reference = tuple(inputs[i] if i in parties else 0 for i in range(r))
                if reference == inputs:
                    continue
                if marginal(box, parties, inputs) != marginal(box, parties, reference):
                    raise SignalingError(
                        f"marginal of parties {parties} changes between inputs {reference} and {inputs}"
                    )
    return True


@dataclass
class NsProgram:
    """An ExactLp together with the (outputs, inputs) tuple behind each variable."""

    lp: ExactLp
    variables: List[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    kept_inputs: Tuple[Tuple[int, ...], ...]


def _ns_program(dist: JointDistribution, kept_inputs, allowed) -> NsProgram:
    r = dist.num_parties
    variables = []
    index_of = {}
    for inputs in itertools.product(*kept_inputs):
        for outputs in itertools.product(*(allowed[i][a] for i, a in enumerate(inputs))):
            index_of[(outputs, inputs)] = len(variables)
            variables.append((outputs, inputs))
    lp = ExactLp(len(variables))

    for (outputs, inputs), j in index_of.items():
        x = outputs[0]
        if all(o == x for o in outputs):
            p = dist[(x,) + inputs]
            if p:
                lp.objective[j] = p

    for inputs in itertools.product(*kept_inputs):
        coeffs = {index_of[(outputs, inputs)]: 1
                  for outputs in itertools.product(*(allowed[i][a] for i, a in enumerate(inputs)))}
        lp.add_row(coeffs, "=", 1)

    # summing out party i's output must not depend on a_i
    for i in range(r):
        if len(kept_inputs[i]) < 2:
            continue
        reference = kept_inputs[i][0]
        others = [kept_inputs[j] for j in range(r) if j != i]
        for rest_inputs in itertools.product(*others):
            rest_allowed = [allowed[j][a] for j, a in zip((j for j in range(r) if j != i), rest_inputs)]
            for rest_outputs in itertools.product(*rest_allowed):
                def column(a_i):
                    inputs = rest_inputs[:i] + (a_i,) + rest_inputs[i:]
                    return [index_of[(rest_outputs[:i] + (x,) + rest_outputs[i:], inputs)] for x in allowed[i][a_i]]

                base = column(reference)
                for a_i in kept_inputs[i][1:]:
                    coeffs = {j: Fraction(1) for j in column(a_i)}
                    for j in base:
                        coeffs[j] = coeffs.get(j, 0) - 1
                    lp.add_row(coeffs, "=", 0)
    lp.names = ["Q(" + ",".join(map(str, o)) + "|" + ",".join(map(str, a)) + ")" for o, a in variables]
    return NsProgram(lp, variables, tuple(tuple(k) for k in kept_inputs))


def build_ns_lp(dist: JointDistribution, reduced: bool = False) -> ExactLp:
    return _build_program(dist, reduced).lp


def _build_program(dist: JointDistribution, reduced: bool) -> NsProgram:
    r = dist.num_parties
    if r < 2:
        raise ShapeMismatchError("the no-signaling LP needs at least two parties")
    if reduced:
        kept = []
        for i in range(r):
            weights = dist.input_marginal(i)
            kept.append(tuple(a for a in range(dist.party_sizes[i]) if weights[a]))
        allowed = [support_outputs(dist, i) for i in range(r)]
    else:
        kept = [tuple(range(n)) for n in dist.party_sizes]
        everything = tuple(range(dist.x_size))
        allowed = [[everything] * n for n in dist.party_sizes]
    program = _ns_program(dist, kept, allowed)
    logger.info(
        f"Built {'reduced ' if reduced else ''}no-signaling LP: "
        f"{program.lp.num_vars} variables, {len(program.lp.rows)} rows"
    )
    return program


def _lift(dist: JointDistribution, program: NsProgram, witness: Sequence[Fraction]) -> NoSignalingBox:
    """Full box from a reduced witness; dropped inputs behave like the first kept one."""
    values = {}
    for (outputs, inputs), q in zip(program.variables, witness):
        if q:
            values[(outputs, inputs)] = q
    redirect = []
    for i, kept in enumerate(program.kept_inputs):
        redirect.append([a if a in kept else kept[0] for a in range(dist.party_sizes[i])])

    def entry(outputs, inputs):
        mapped = tuple(redirect[i][a] for i, a in enumerate(inputs))
        return values.get((tuple(outputs), mapped), 0)

    return NoSignalingBox.from_function(dist.alphabets, entry)


def pns_exact(dist: JointDistribution, reduced: bool = True) -> Tuple[Fraction, NoSignalingBox]:
    program = _build_program(dist, reduced)
    value, witness = simplex_max(program.lp)
    box = _lift(dist, program, witness)
    validate_box(box)
    if box_value(dist, box) != value:
        raise ValidationError("reconstructed box does not reproduce the LP optimum")
    logger.info(f"No-signaling value {value}")
    return value, box


def box_value(dist: JointDistribution, box: NoSignalingBox) -> Fraction:
    """sum P(x, a) Q(x, ..., x | a)"""
    total = Fraction(0)
    r = dist.num_parties
    for index, p in dist.support():
        total += p * box((index[0],) * r, index[1:])
    return total


def qk_box(k: int, d: int) -> NoSignalingBox:
    if not 2 <= k <= d:
        raise KOutOfRangeError(f"need 2 <= k <= d, got k={k}, d={d}")
    weight = Fraction(1, k)

    def entry(outputs, inputs):
        x_a, x_b = outputs
        a, b = inputs
        return weight if x_a < k and x_b < k and (x_a - x_b) % k == a * b else 0

    return NoSignalingBox.from_function((d, 2, 2), entry)


def table1_functions() -> Tuple[Tuple[Tuple[int, ...], ...], Tuple[Tuple[int, ...], ...]]:
    """Output permutations f[a][x], g[b][x] that make Q^2 optimal on theorem1_game."""
    f = ((2, 1, 0), (0, 1, 2))
    g = ((0, 1, 2), (1, 2, 0))
    return f, g


def qk_objective(dist: JointDistribution, k: int, f, g) -> Fraction:
    """sum P(x,a,b) Q^k(f[a][x], g[b][x] | a, b)"""
    total = Fraction(0)
    for (x, a, b), p in dist.support():
        u, v = f[a][x], g[b][x]
        if u < k and v < k and (u - v) % k == a * b:
            total += p
    return total / k


@dataclass(frozen=True)
class PermutationWitness:
    """Maximizer of the binary-input formula; ``k`` is None when the classical term wins."""

    value: Fraction
    k: Optional[int]
    f: Optional[Tuple[Tuple[int, ...], ...]]
    g: Optional[Tuple[Tuple[int, ...], ...]]


def _integer_table(dist: JointDistribution) -> Tuple[Dict[Tuple[int, int, int], int], int]:
    scale = math.lcm(*(p.denominator for _, p in dist.support()))
    return {index: int(p * scale) for index, p in dist.support()}, scale


def _best_bob_permutation(weights: np.ndarray, float_safe: bool) -> Tuple[int, Tuple[int, ...]]:
    d = weights.shape[0]
    if float_safe:
        rows, cols = linear_sum_assignment(weights.astype(float), maximize=True)
        perm = [0] * d
        for x, v in zip(rows, cols):
            perm[x] = int(v)
        return int(sum(int(weights[x, perm[x]]) for x in range(d))), tuple(perm)
    best, best_perm = -1, None
    for perm in itertools.permutations(range(d)):
        score = sum(int(weights[x, perm[x]]) for x in range(d))
        if score > best:
            best, best_perm = score, perm
    return best, best_perm


def _search_k(dist: JointDistribution, k: int) -> PermutationWitness:
    d = dist.x_size
    table, scale = _integer_table(dist)
    float_safe = scale * 4 < _EXACT_FLOAT_LIMIT
    best_score, best = -1, None
    perms = list(itertools.permutations(range(d)))
    for f0, f1 in itertools.product(perms, repeat=2):
        f = (f0, f1)
        score = 0
        g = []
        for b in range(2):
            weights = np.zeros((d, d), dtype=np.int64 if float_safe else object)
            for (x, a, b_), p in table.items():
                if b_ != b:
                    continue
                u = f[a][x]
                if u >= k:
                    continue
                # Q^k fires for the unique v with (u - v) mod k == ab
                v = (u - a * b) % k
                weights[x, v] += p
            part, perm = _best_bob_permutation(weights, float_safe)
            score += part
            g.append(perm)
        if score > best_score:
            best_score, best = score, (f, tuple(g))
    return PermutationWitness(Fraction(best_score, scale * k), k, best[0], best[1])


def pns_binary_inputs(dist: JointDistribution, max_d: int = DEFAULT_PERMUTATION_MAX_D,
                      threads: int = 1) -> PermutationWitness:
    """max{p_c, max_k max_{f,g} sum P(x,a,b) Q^k(f(x,a), g(x,b) | a, b)}.

    Bob's permutations are found per input as an assignment problem, so only
    Alice's (d!)^2 permutation pairs are enumerated for each k.
    """
    if dist.num_parties != 2 or dist.party_sizes != (2, 2) or dist.x_size < 2:
        raise ShapeMismatchError(f"permutation formula needs binary inputs and |X| >= 2, got {dist.alphabets}")
    d = dist.x_size
    if d > max_d:
        raise BudgetExceededError("permutation enumeration", math.factorial(d) ** 4 * (d - 1),
                                  math.factorial(max_d) ** 4 * (max_d - 1))
    best = PermutationWitness(pc_binary_closed_form(dist), None, None, None)
    ks = list(range(2, d + 1))
    if threads > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(ks))) as pool:
            results = list(pool.map(lambda k: _search_k(dist, k), ks))
    else:
        results = [_search_k(dist, k) for k in ks]
    for witness in results:
        logger.debug(f"k={witness.k}: {witness.value}")
        if witness.value > best.value:
            best = witness
    logger.info(f"Binary-input no-signaling value {best.value} (k={best.k})")
    return best


def dump_box(box: NoSignalingBox) -> str:
    lines = [
        BOX_HEADER,
        f"parties {box.num_parties}",
        "alphabets " + " ".join(str(n) for n in box.alphabets),
    ]
    for outputs, inputs, q in box.support():
        lines.append(" ".join(str(i) for i in outputs + inputs) + " " + format_rational(q))
    return "\n".join(lines) + "\n"


def parse_box(text: str) -> NoSignalingBox:
    lines = list(content_lines(text))
    if not lines or " ".join(lines[0][1]) != BOX_HEADER:
        raise ParseError(f"first line must be {BOX_HEADER!r}", lines[0][0] if lines else 1)
    if len(lines) < 3:
        raise ParseError("missing 'parties' or 'alphabets' line", lines[-1][0])
    number, tokens = lines[1]
    try:
        if tokens[0] != "parties" or len(tokens) != 2:
            raise ValueError
        r = int(tokens[1])
    except ValueError:
        raise ParseError("expected 'parties <r>'", number) from None
    number, tokens = lines[2]
    try:
        if tokens[0] != "alphabets" or len(tokens) != r + 2:
            raise ValueError
        alphabets = tuple(int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError(f"expected 'alphabets' followed by {r + 1} sizes", number) from None
    if r < 1 or any(n < 1 for n in alphabets):
        raise ParseError("party count and alphabet sizes must be positive", number)

    shape = (alphabets[0],) * r + alphabets[1:]
    values = {}
    for number, tokens in lines[3:]:
        if len(tokens) != 2 * r + 1:
            raise ParseError(f"entry needs {2 * r} indices and a probability", number)
        try:
            index = tuple(int(t) for t in tokens[:-1])
        except ValueError:
            raise ParseError("indices must be integers", number) from None
        if any(not 0 <= i < n for i, n in zip(index, shape)):
            raise ParseError(f"index {index} out of range", number)
        if index in values:
            raise ParseError(f"duplicate entry {index}", number)
        values[index] = parse_rational(tokens[-1], number)
    return NoSignalingBox.from_function(alphabets, lambda o, a: values.get(tuple(o) + tuple(a), 0))


def load_box(path) -> NoSignalingBox:
    return parse_box(read_input(path))


def save_box(box: NoSignalingBox, path) -> None:
    Path(path).write_text(dump_box(box), encoding="utf-8")
