"""Game instances and the exact/complex domain types shared by all solvers.

Probabilities are ``fractions.Fraction`` everywhere on the classical and
no-signaling paths. Matrices are ``numpy`` complex128 arrays.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from .errors import (
    AlphaOutOfRangeError,
    InvalidPovmError,
    NegativeEntryError,
    NotNormalizedError,
    ParseError,
    PartyCountMismatchError,
    ShapeMismatchError,
    ValidationError,
)

logger = logging.getLogger(__name__)

Index = Tuple[int, ...]

HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-10

GAME_HEADER = "lssd-game v1"


@dataclass(frozen=True)
class JointDistribution:
    """Dense table P(x, a_1, ..., a_r) over finite alphabets.

    ``alphabets`` is ``(|X|, |A_1|, ..., |A_r|)``; ``entries`` is the row-major
    flattening of the table.
    """

    alphabets: Tuple[int, ...]
    entries: Tuple[Fraction, ...]

    @property
    def num_parties(self) -> int:
        return len(self.alphabets) - 1

    @property
    def x_size(self) -> int:
        return self.alphabets[0]

    @property
    def party_sizes(self) -> Tuple[int, ...]:
        return self.alphabets[1:]

    def _offset(self, index: Sequence[int]) -> int:
        if len(index) != len(self.alphabets):
            raise ShapeMismatchError(f"index {tuple(index)} has wrong arity for alphabets {self.alphabets}")
        offset = 0
        for i, size in zip(index, self.alphabets):
            if not 0 <= i < size:
                raise ShapeMismatchError(f"index {tuple(index)} out of range for alphabets {self.alphabets}")
            offset = offset * size + i
        return offset

    def __getitem__(self, index: Sequence[int]) -> Fraction:
        return self.entries[self._offset(index)]

    def indices(self) -> Iterator[Index]:
        return itertools.product(*(range(n) for n in self.alphabets))

    def items(self) -> Iterator[Tuple[Index, Fraction]]:
        return zip(self.indices(), self.entries)

    def support(self) -> Iterator[Tuple[Index, Fraction]]:
        """Nonzero entries in lexicographic order."""
        return ((index, p) for index, p in self.items() if p)

    def marginal_x(self) -> Tuple[Fraction, ...]:
        totals = [Fraction(0)] * self.x_size
        for index, p in self.support():
            totals[index[0]] += p
        return tuple(totals)

    def party_marginal(self, party: int) -> Tuple[Tuple[Fraction, ...], ...]:
        """P_{X A_i} as ``table[x][a]`` (``party`` counts from 0)."""
        table = [[Fraction(0)] * self.party_sizes[party] for _ in range(self.x_size)]
        for index, p in self.support():
            table[index[0]][index[1 + party]] += p
        return tuple(tuple(row) for row in table)

    def input_marginal(self, party: int) -> Tuple[Fraction, ...]:
        totals = [Fraction(0)] * self.party_sizes[party]
        for index, p in self.support():
            totals[index[1 + party]] += p
        return tuple(totals)

    @classmethod
    def from_entries(cls, alphabets: Sequence[int], entries: Dict[Index, Fraction]) -> "JointDistribution":
        """Build from a sparse mapping; missing indices are zero. Validates."""
        alphabets = tuple(int(n) for n in alphabets)
        size = math.prod(alphabets)
        table = [Fraction(0)] * size
        shell = cls(alphabets, tuple(table))
        for index, p in entries.items():
            table[shell._offset(index)] = Fraction(p)
        dist = cls(alphabets, tuple(table))
        validate(dist)
        return dist


@dataclass(frozen=True)
class CqqState:
    """Referee distribution plus one density matrix per referee value."""

    prior: Tuple[Fraction, ...]
    states: Tuple[np.ndarray, ...]
    dims: Tuple[int, int]


@dataclass(frozen=True)
class Povm:
    elements: Tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def d(self) -> int:
        return self.elements[0].shape[0]

    def is_projective(self, tol: float = STATE_TOL) -> bool:
        return all(np.allclose(m @ m, m, atol=tol) for m in self.elements)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Lookup tables f_i: A_i -> X, one per party."""

    tables: Tuple[Tuple[int, ...], ...]

    def outputs(self, inputs: Sequence[int]) -> Tuple[int, ...]:
        return tuple(table[a] for table, a in zip(self.tables, inputs))


def validate(dist: JointDistribution) -> bool:
    """Check the JointDistribution invariants; raise the first violation found."""
    if len(dist.alphabets) < 2 or any(n < 1 for n in dist.alphabets):
        raise ShapeMismatchError(f"alphabets must be (|X|, |A_1|, ...) with r >= 1 and sizes >= 1, got {dist.alphabets}")
    expected = math.prod(dist.alphabets)
    if len(dist.entries) != expected:
        raise ShapeMismatchError(f"table has {len(dist.entries)} entries, alphabets {dist.alphabets} need {expected}")
    total = Fraction(0)
    for index, p in dist.items():
        if p < 0:
            raise NegativeEntryError(index, p)
        total += p
    if total != 1:
        raise NotNormalizedError(total)
    return True


def point_mass(alphabets: Sequence[int], index: Sequence[int]) -> JointDistribution:
    return JointDistribution.from_entries(alphabets, {tuple(index): Fraction(1)})


def check_alpha(alpha) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 <= alpha <= Fraction(1, 2):
        raise AlphaOutOfRangeError(alpha)
    return alpha


def noisy_bit_game(alpha) -> JointDistribution:
    """(X, X xor Y, X xor Z) with X uniform and P(Y=1) = P(Z=1) = alpha."""
    alpha = check_alpha(alpha)
    half = Fraction(1, 2)
    entries = {}
    for x, a, b in itertools.product(range(2), repeat=3):
        p_y = alpha if a != x else 1 - alpha
        p_z = alpha if b != x else 1 - alpha
        entries[(x, a, b)] = half * p_y * p_z
    return JointDistribution.from_entries((2, 2, 2), entries)


def product_game(p: JointDistribution, q: JointDistribution) -> JointDistribution:
    """Independent copies: every alphabet becomes a Cartesian product.

    The pair (u, u') is encoded as ``u * |U'| + u'``.
    """
    if p.num_parties != q.num_parties:
        raise PartyCountMismatchError(f"cannot pair a {p.num_parties}-party game with a {q.num_parties}-party game")
    alphabets = tuple(m * n for m, n in zip(p.alphabets, q.alphabets))
    entries = {}
    for index_p, prob_p in p.support():
        for index_q, prob_q in q.support():
            index = tuple(i * n + j for i, j, n in zip(index_p, index_q, q.alphabets))
            entries[index] = prob_p * prob_q
    return JointDistribution.from_entries(alphabets, entries)


THEOREM1_SUPPORT = ((0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 1, 0), (2, 0, 1))


def theorem1_game() -> JointDistribution:
    """Uniform distribution over five triples separating p_c < p_q < p_ns."""
    fifth = Fraction(1, 5)
    return JointDistribution.from_entries((3, 2, 2), {index: fifth for index in THEOREM1_SUPPORT})


def alpha_threshold(denominator: int) -> Fraction:
    """Nearest fraction with the given denominator to 1 - 1/sqrt(2), exactly."""
    if denominator < 1:
        raise ValidationError(f"denominator must be positive, got {denominator}")
    # round(D / sqrt 2) = floor(sqrt(D^2 / 2) + 1/2)
    twice_square = 2 * denominator * denominator
    r = math.isqrt(twice_square // 4)
    while (2 * r + 1) ** 2 <= twice_square:
        r += 1
    return Fraction(denominator - r, denominator)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, atol=tol, rtol=0)


def validate_povm(povm: Povm, tol: float = STATE_TOL) -> bool:
    if povm.n < 1:
        raise InvalidPovmError("a POVM needs at least one outcome")
    d = povm.d
    total = np.zeros((d, d), dtype=complex)
    for i, m in enumerate(povm.elements):
        if m.shape != (d, d):
            raise InvalidPovmError(f"element {i} has shape {m.shape}, expected {(d, d)}")
        if not is_hermitian(m, tol):
            raise InvalidPovmError(f"element {i} is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise InvalidPovmError(f"element {i} is not positive semi-definite")
        total = total + m
    if not np.allclose(total, np.eye(d), atol=tol, rtol=0):
        raise InvalidPovmError("elements do not sum to the identity")
    return True


def validate_state(state: CqqState, tol: float = STATE_TOL) -> bool:
    if sum(state.prior, Fraction(0)) != 1:
        raise NotNormalizedError(sum(state.prior, Fraction(0)), where="referee distribution")
    if any(p < 0 for p in state.prior):
        raise NegativeEntryError((state.prior.index(min(state.prior)),), min(state.prior))
    if len(state.prior) != len(state.states):
        raise ShapeMismatchError(f"{len(state.prior)} referee values but {len(state.states)} states")
    dim = state.dims[0] * state.dims[1]
    for x, rho in enumerate(state.states):
        if rho.shape != (dim, dim):
            raise ShapeMismatchError(f"state {x} has shape {rho.shape}, expected {(dim, dim)}")
        if not is_hermitian(rho, tol):
            raise ShapeMismatchError(f"state {x} is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -tol:
            raise ShapeMismatchError(f"state {x} is not positive semi-definite")
        if abs(np.trace(rho) - 1) > tol:
            raise NotNormalizedError(np.trace(rho).real, where=f"trace of state {x}")
    return True


def example2_state() -> CqqState:
    """|phi^x> = (|x>|perp> + |perp>|x>)/sqrt(2) on C^3 x C^3, uniform x in {0, 1}."""
    perp = 2
    states = []
    for x in range(2):
        phi = np.zeros(9, dtype=complex)
        phi[x * 3 + perp] += 1 / np.sqrt(2)
        phi[perp * 3 + x] += 1 / np.sqrt(2)
        states.append(np.outer(phi, phi.conj()))
    state = CqqState((Fraction(1, 2), Fraction(1, 2)), tuple(states), (3, 3))
    validate_state(state, tol=1e-12)
    return state


def classical_diagonal_state(dist: JointDistribution) -> CqqState:
    """Embed a two-party game as diagonal states rho^x = sum P(a,b|x) |a><a| (x) |b><b|."""
    if dist.num_parties != 2:
        raise ShapeMismatchError("classical embedding needs exactly two parties")
    d_a, d_b = dist.party_sizes
    prior = dist.marginal_x()
    states = []
    for x in range(dist.x_size):
        diag = np.zeros(d_a * d_b)
        if prior[x]:
            for a, b in itertools.product(range(d_a), range(d_b)):
                diag[a * d_b + b] = float(dist[(x, a, b)] / prior[x])
        else:
            diag[0] = 1.0
        states.append(np.diag(diag).astype(complex))
    return CqqState(prior, tuple(states), (d_a, d_b))


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(token: str, line=None) -> Fraction:
    try:
        if "/" in token:
            num, den = token.split("/", 1)
            num, den = int(num), int(den)
        else:
            num, den = int(token), 1
    except ValueError:
        raise ParseError(f"malformed probability {token!r}", line) from None
    if den <= 0:
        raise ParseError(f"probability {token!r} has a non-positive denominator", line)
    return Fraction(num, den)


def read_input(path) -> str:
    """Read a UTF-8 input file; undecodable bytes become a ParseError at their line."""
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[:exc.start].count(b"\n") + 1
        raise ParseError(f"not valid UTF-8 at byte {exc.start}", line) from None


def content_lines(text: str) -> Iterator[Tuple[int, list]]:
    """(line number, tokens) for every line that is not blank or a comment."""
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield number, body.split()


def _parse_ints(tokens, line, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"{what} must be integers, got {' '.join(tokens)!r}", line) from None


def parse_game(text: str) -> JointDistribution:
    lines = list(content_lines(text))
    if not lines or " ".join(lines[0][1]) != GAME_HEADER:
        raise ParseError(f"first line must be {GAME_HEADER!r}", lines[0][0] if lines else 1)
    if len(lines) < 3:
        raise ParseError("missing 'parties' or 'alphabets' line", lines[-1][0])
    number, tokens = lines[1]
    if len(tokens) != 2 or tokens[0] != "parties":
        raise ParseError("expected 'parties <r>'", number)
    r = _parse_ints(tokens[1:], number, "party count")[0]
    if r < 1:
        raise ParseError("party count must be at least 1", number)
    number, tokens = lines[2]
    if tokens[0] != "alphabets" or len(tokens) != r + 2:
        raise ParseError(f"expected 'alphabets <|X|>' followed by {r} party sizes", number)
    alphabets = _parse_ints(tokens[1:], number, "alphabet sizes")
    if any(n < 1 for n in alphabets):
        raise ParseError("alphabet sizes must be positive", number)

    entries: Dict[Index, Fraction] = {}
    last_line = number
    for number, tokens in lines[3:]:
        last_line = number
        if len(tokens) != r + 2:
            raise ParseError(f"entry needs {r + 1} indices and a probability", number)
        index = tuple(_parse_ints(tokens[:-1], number, "indices"))
        if any(not 0 <= i < n for i, n in zip(index, alphabets)):
            raise ParseError(f"index {index} out of range", number)
        if index in entries:
            raise ParseError(f"duplicate entry {index}", number)
        entries[index] = parse_rational(tokens[-1], number)
    try:
        return JointDistribution.from_entries(alphabets, entries)
    except ValidationError as exc:
        raise ParseError(str(exc), last_line) from exc


def dump_game(dist: JointDistribution) -> str:
    lines = [
        GAME_HEADER,
        f"parties {dist.num_parties}",
        "alphabets " + " ".join(str(n) for n in dist.alphabets),
    ]
    for index, p in dist.support():
        lines.append(" ".join(str(i) for i in index) + " " + format_rational(p))
    return "\n".join(lines) + "\n"


def load_game(path) -> JointDistribution:
    text = read_input(path)
    dist = parse_game(text)
    logger.info(f"Loaded {dist.num_parties}-party game with alphabets {dist.alphabets} from {path}")
    return dist


def save_game(dist: JointDistribution, path) -> None:
    validate(dist)
    Path(path).write_text(dump_game(dist), encoding="utf-8")
    logger.debug(f"Saved game to {path}")
