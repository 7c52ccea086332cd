"""Entangled strategies: the Omega operator, qubit strategy search, Naimark
dilation and zero-outcome pruning."""

import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .classical import support_outputs
from .core_model import HERMITIAN_TOL, JointDistribution, Povm, is_hermitian, validate_povm
from .errors import NotHermitianError, ShapeMismatchError

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]

NELDER_MEAD_OPTIONS = {"xatol": 1e-10, "fatol": 1e-15, "adaptive": False}


@dataclass(frozen=True)
class MeasurementFamily:
    """One POVM per input of a party, all on the same local dimension."""

    povms: Tuple[Povm, ...]

    @property
    def d(self) -> int:
        return self.povms[0].d

    def __getitem__(self, a: int) -> Povm:
        return self.povms[a]

    def validate(self) -> bool:
        for povm in self.povms:
            validate_povm(povm)
        if len({povm.d for povm in self.povms}) != 1:
            raise ShapeMismatchError("inputs use different local dimensions")
        return True


@dataclass(frozen=True)
class QubitStrategy:
    """Projective qubit measurements given by one angle per input.

    Input a of a party with pair (s, t) measures Pi(theta) on outcome s and
    1 - Pi(theta) on t; the pair (s, s) is the identity on s. ``angles`` lists
    Alice's inputs first, then Bob's.
    """

    angles: Tuple[float, ...]
    alice_pairs: Tuple[Pair, ...]
    bob_pairs: Tuple[Pair, ...]
    num_outcomes: int
    state: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.angles) != len(self.alice_pairs) + len(self.bob_pairs):
            raise ShapeMismatchError("one angle per input is required")
        if not np.all(np.isfinite(self.angles)):
            raise ShapeMismatchError("angles must be finite")
        if self.state is not None and abs(np.linalg.norm(self.state) - 1) > 1e-12:
            raise ShapeMismatchError("explicit state must be normalized")

    def families(self) -> Tuple[MeasurementFamily, MeasurementFamily]:
        split = len(self.alice_pairs)
        alice = _pattern_family(self.angles[:split], self.alice_pairs, self.num_outcomes)
        bob = _pattern_family(self.angles[split:], self.bob_pairs, self.num_outcomes)
        return alice, bob


def projector(theta: float) -> np.ndarray:
    """|psi(theta)><psi(theta)| with psi(theta) = cos(theta)|0> + sin(theta)|1>"""
    psi = np.array([np.cos(theta), np.sin(theta)], dtype=complex)
    return np.outer(psi, psi.conj())


def _pattern_family(angles: Sequence[float], pairs: Sequence[Pair], n: int) -> MeasurementFamily:
    povms = []
    for theta, (s, t) in zip(angles, pairs):
        elements = [np.zeros((2, 2), dtype=complex) for _ in range(n)]
        if s == t:
            elements[s] = np.eye(2, dtype=complex)
        else:
            pi = projector(theta)
            elements[s] = pi
            elements[t] = np.eye(2, dtype=complex) - pi
        povms.append(Povm(tuple(elements)))
    return MeasurementFamily(tuple(povms))


def _omega_sum(dist: JointDistribution, alice: MeasurementFamily, bob: MeasurementFamily) -> np.ndarray:
    dim = alice.d * bob.d
    total = np.zeros((dim, dim), dtype=complex)
    for (x, a, b), p in dist.support():
        total += float(p) * np.kron(alice[a].elements[x], bob[b].elements[x])
    return total


def omega(dist: JointDistribution, alice: MeasurementFamily, bob: MeasurementFamily) -> np.ndarray:
    """sum P(x,a,b) M_x(a) (x) N_x(b)"""
    if dist.num_parties != 2:
        raise ShapeMismatchError("Omega is defined for two parties")
    if len(alice.povms) != dist.party_sizes[0] or len(bob.povms) != dist.party_sizes[1]:
        raise ShapeMismatchError("measurement families do not match the input alphabets")
    if any(p.n != dist.x_size for p in alice.povms + bob.povms):
        raise ShapeMismatchError(f"every POVM needs {dist.x_size} outcomes")
    alice.validate()
    bob.validate()
    return _omega_sum(dist, alice, bob)


def principal_eigenvalue(h: np.ndarray) -> Tuple[float, np.ndarray]:
    if not is_hermitian(h, HERMITIAN_TOL):
        raise NotHermitianError("matrix is not Hermitian")
    values, vectors = np.linalg.eigh(h)
    return float(values[-1]), vectors[:, -1]


def eval_strategy(dist: JointDistribution, strat: QubitStrategy) -> float:
    if dist.num_parties != 2 or dist.x_size != strat.num_outcomes:
        raise ShapeMismatchError("strategy does not fit the game")
    matrix = omega(dist, *strat.families())
    if strat.state is not None:
        return float(np.real(strat.state.conj() @ matrix @ strat.state))
    return principal_eigenvalue(matrix)[0]


def optimal_state(dist: JointDistribution, strat: QubitStrategy) -> np.ndarray:
    return principal_eigenvalue(omega(dist, *strat.families()))[1]


THEOREM1_ALICE_PAIRS = ((1, 2), (0, 1))
THEOREM1_BOB_PAIRS = ((0, 1), (0, 2))


def reference_angles() -> Tuple[float, float, float, float]:
    sqrt13 = np.sqrt(13.0)
    theta1 = np.arccos((121 + 52 * sqrt13) / 477) / 4
    theta2 = np.arccos((-431 + 4 * sqrt13) / 477) / 4
    return (-theta1, theta2, np.pi / 2 - theta2, theta1)


def paper_strategy() -> QubitStrategy:
    """The qubit strategy reaching (16 + sqrt 13)/45 on theorem1_game."""
    return QubitStrategy(reference_angles(), THEOREM1_ALICE_PAIRS, THEOREM1_BOB_PAIRS, 3)


def reference_state() -> np.ndarray:
    """s+|00> + s-|11> with s+- = sqrt(1/2 +- sqrt(715 - 182 sqrt 13)/78)."""
    root = np.sqrt(715 - 182 * np.sqrt(13.0)) / 78
    state = np.zeros(4, dtype=complex)
    state[0] = np.sqrt(0.5 + root)
    state[3] = np.sqrt(0.5 - root)
    return state


def schmidt_coefficients(vector: np.ndarray, dims: Tuple[int, int] = (2, 2)) -> np.ndarray:
    """Descending Schmidt coefficients of a bipartite pure state."""
    return np.linalg.svd(np.asarray(vector).reshape(dims), compute_uv=False)


def outcome_pairs(dist: JointDistribution, party: int) -> Tuple[Tuple[Pair, ...], ...]:
    """Per input, the outcome pairs a qubit projective measurement may use after pruning."""
    choices = []
    for outputs in support_outputs(dist, party):
        if len(outputs) == 1:
            choices.append(((outputs[0], outputs[0]),))
        else:
            choices.append(tuple(itertools.combinations(outputs, 2)))
    return tuple(choices)


def _patterns(dist: JointDistribution):
    alice = outcome_pairs(dist, 0)
    bob = outcome_pairs(dist, 1)
    for alice_pairs in itertools.product(*alice):
        for bob_pairs in itertools.product(*bob):
            yield alice_pairs, bob_pairs


def _run_pattern(dist: JointDistribution, alice_pairs, bob_pairs, starts, budget: int):
    n = dist.x_size

    def objective(angles):
        strat = QubitStrategy(tuple(angles), alice_pairs, bob_pairs, n)
        return -principal_eigenvalue(_omega_sum(dist, *strat.families()))[0]

    best_value, best_angles = -np.inf, None
    for start in starts:
        value = -objective(start)
        if value > best_value:
            best_value, best_angles = value, np.asarray(start, dtype=float)
        result = minimize(objective, start, method="Nelder-Mead",
                          options=dict(NELDER_MEAD_OPTIONS, maxfev=budget))
        # a second run from the optimum restarts the collapsed simplex
        result = minimize(objective, result.x, method="Nelder-Mead",
                          options=dict(NELDER_MEAD_OPTIONS, maxfev=budget))
        if -result.fun > best_value:
            best_value, best_angles = -result.fun, result.x
    return best_value, QubitStrategy(tuple(float(t) for t in best_angles), alice_pairs, bob_pairs, n)


def optimize_qubit(dist: JointDistribution, seeds: int = 20, budget: int = 4000,
                   seed: int = 0, threads: int = 1) -> Tuple[float, QubitStrategy]:
    """Best qubit strategy found by Nelder-Mead over every prune-consistent pattern.

    Starting points are the 0 / pi/2 grid (deterministic strategies) followed by
    ``seeds`` random angle vectors.
    """
    if dist.num_parties != 2:
        raise ShapeMismatchError("qubit search is defined for two parties")
    rng = np.random.default_rng(seed)
    num_angles = sum(dist.party_sizes)
    grid = [np.array(c) for c in itertools.product((0.0, np.pi / 2), repeat=num_angles)]
    randoms = [rng.uniform(-np.pi / 2, np.pi / 2, num_angles) for _ in range(seeds)]
    patterns = list(_patterns(dist))
    logger.info(f"Searching {len(patterns)} measurement patterns with {seeds} random starts each")

    def run(pattern):
        value, strat = _run_pattern(dist, pattern[0], pattern[1], grid[:1] + randoms, budget)
        for corner in grid:
            candidate = QubitStrategy(tuple(corner), pattern[0], pattern[1], dist.x_size)
            corner_value = eval_strategy(dist, candidate)
            if corner_value > value:
                value, strat = corner_value, candidate
        return value, strat

    if threads > 1 and len(patterns) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, patterns))
    else:
        results = [run(pattern) for pattern in patterns]

    best_value, best = max(results, key=lambda item: item[0])
    best = replace(best, state=optimal_state(dist, best))
    logger.info(f"Best qubit strategy value {best_value:.12f}")
    return best_value, best


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(m)
    return (vectors * np.sqrt(np.clip(values, 0, None))) @ vectors.conj().T


def naimark_dilate(povm: Povm) -> Tuple[np.ndarray, Povm]:
    """Isometry U = sum_i sqrt(M_i) (x) |i> and projectors 1 (x) |i><i| with U^dag Pi_i U = M_i."""
    validate_povm(povm)
    d, n = povm.d, povm.n
    isometry = np.zeros((d * n, d), dtype=complex)
    projectors = []
    for i, m in enumerate(povm.elements):
        basis = np.zeros((n, 1), dtype=complex)
        basis[i, 0] = 1
        isometry += np.kron(matrix_sqrt_psd(m), basis)
        projectors.append(np.kron(np.eye(d), basis @ basis.T))
    return isometry, Povm(tuple(projectors))


def prune(dist: JointDistribution, party: int, family: MeasurementFamily) -> MeasurementFamily:
    """Move every never-correct outcome's operator onto the first useful outcome."""
    if dist.num_parties != 2:
        raise ShapeMismatchError("pruning is defined for two parties")
    family.validate()
    marginal = dist.party_marginal(party)
    weights = dist.input_marginal(party)
    povms = []
    for a, povm in enumerate(family.povms):
        if not weights[a]:
            povms.append(povm)
            continue
        useful = [x for x in range(dist.x_size) if marginal[x][a]]
        target = useful[0]
        elements = [m.copy() for m in povm.elements]
        for x in range(dist.x_size):
            if x not in useful:
                elements[target] = elements[target] + elements[x]
                elements[x] = np.zeros_like(elements[x])
        povms.append(Povm(tuple(elements)))
    return MeasurementFamily(tuple(povms))


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_povm(rng: np.random.Generator, d: int, n: int) -> Povm:
    """M_i = S^-1/2 A_i^dag A_i S^-1/2 for Gaussian A_i, S = sum A_i^dag A_i."""
    raw = []
    for _ in range(n):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        raw.append(g.conj().T @ g)
    values, vectors = np.linalg.eigh(sum(raw))
    inv_sqrt = (vectors / np.sqrt(values)) @ vectors.conj().T
    elements = []
    for a in raw:
        m = inv_sqrt @ a @ inv_sqrt
        elements.append((m + m.conj().T) / 2)
    return Povm(tuple(elements))


def strategy_to_dict(strat: QubitStrategy, value: Optional[float] = None) -> dict:
    data = {
        "angles": [float(t) for t in strat.angles],
        "alice_pairs": [list(p) for p in strat.alice_pairs],
        "bob_pairs": [list(p) for p in strat.bob_pairs],
        "num_outcomes": strat.num_outcomes,
        "state": None if strat.state is None else [[float(z.real), float(z.imag)] for z in strat.state],
    }
    if value is not None:
        data["value"] = float(value)
    return data


def strategy_from_dict(data: dict) -> QubitStrategy:
    state = data.get("state")
    if state is not None:
        state = np.array([complex(re, im) for re, im in state])
    return QubitStrategy(
        tuple(float(t) for t in data["angles"]),
        tuple(tuple(p) for p in data["alice_pairs"]),
        tuple(tuple(p) for p in data["bob_pairs"]),
        int(data["num_outcomes"]),
        state,
    )


def dump_strategy(strat: QubitStrategy, value: Optional[float] = None) -> str:
    return json.dumps(strategy_to_dict(strat, value), indent=2)
