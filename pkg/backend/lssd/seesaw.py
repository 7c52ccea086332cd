"""See-saw lower bound for unentangled guessing on cqq inputs.

Each half-step fixes one party's POVM and improves the other's by gradient
ascent over M_x = S^-1/2 A_x^dag A_x S^-1/2, S = sum_x A_x^dag A_x. Gradients
come from torch autograd; a step is kept only if the exactly re-evaluated
objective improves, so the objective never decreases.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import torch

from .core_model import CqqState, Povm
from .errors import DimensionTooLargeError
from .quantum import matrix_sqrt_psd, random_povm

logger = logging.getLogger(__name__)

MAX_LOCAL_DIM = 8
INNER_STEPS = 60
NEWTON_SCHULZ_ITERS = 40


def _inverse_sqrt_np(s: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(s)
    return (vectors / np.sqrt(values)) @ vectors.conj().T


def povm_from_factors(factors: np.ndarray) -> List[np.ndarray]:
    s = sum(a.conj().T @ a for a in factors)
    inv_sqrt = _inverse_sqrt_np(s)
    elements = []
    for a in factors:
        m = inv_sqrt @ a.conj().T @ a @ inv_sqrt
        elements.append((m + m.conj().T) / 2)
    return elements


def _inverse_sqrt_torch(s: torch.Tensor) -> torch.Tensor:
    """Coupled Newton-Schulz iteration; differentiable at degenerate spectra."""
    d = s.shape[-1]
    scale = torch.real(torch.trace(s))
    eye = torch.eye(d, dtype=s.dtype)
    y, z = s / scale, eye
    for _ in range(NEWTON_SCHULZ_ITERS):
        t = 0.5 * (3 * eye - z @ y)
        y, z = y @ t, t @ z
    return z / torch.sqrt(scale)


def _objective_torch(factors: torch.Tensor, weights: torch.Tensor) -> torch.Tensor:
    s = sum(a.conj().T @ a for a in factors)
    inv_sqrt = _inverse_sqrt_torch(s)
    total = torch.zeros((), dtype=torch.float64)
    for a, r in zip(factors, weights):
        m = inv_sqrt @ a.conj().T @ a @ inv_sqrt
        total = total + torch.real(torch.trace(r @ m))
    return total


def linear_value(weights: Sequence[np.ndarray], elements: Sequence[np.ndarray]) -> float:
    return float(sum(np.real(np.trace(r @ m)) for r, m in zip(weights, elements)))


def improve_povm(weights: Sequence[np.ndarray], elements: Sequence[np.ndarray],
                 steps: int = INNER_STEPS) -> Tuple[List[np.ndarray], float]:
    """Ascend sum_x tr(R_x M_x) from the given POVM; never returns a worse one."""
    best_elements = [np.array(m) for m in elements]
    best = linear_value(weights, best_elements)
    factors = np.stack([matrix_sqrt_psd(m) for m in best_elements])
    weight_t = torch.from_numpy(np.stack(weights).astype(np.complex128))
    lr = 0.1
    for _ in range(steps):
        a = torch.from_numpy(factors.copy()).requires_grad_(True)
        _objective_torch(a, weight_t).backward()
        grad = a.grad.detach().numpy()
        if not np.all(np.isfinite(grad)):
            break
        candidate = factors + lr * grad
        candidate_elements = povm_from_factors(candidate)
        value = linear_value(weights, candidate_elements)
        if value > best:
            factors, best_elements, best = candidate, candidate_elements, value
            lr *= 1.5
        else:
            lr *= 0.5
            if lr < 1e-12:
                break
    return best_elements, best


def _alice_weights(state: CqqState, bob: Sequence[np.ndarray]) -> List[np.ndarray]:
    """R_x = P_X(x) Tr_B[rho^x (1 (x) N_x)]"""
    d_a, d_b = state.dims
    weights = []
    for p, rho, n in zip(state.prior, state.states, bob):
        r4 = rho.reshape(d_a, d_b, d_a, d_b)
        weights.append(float(p) * np.einsum("ibjc,cb->ij", r4, n))
    return weights


def _bob_weights(state: CqqState, alice: Sequence[np.ndarray]) -> List[np.ndarray]:
    d_a, d_b = state.dims
    weights = []
    for p, rho, m in zip(state.prior, state.states, alice):
        r4 = rho.reshape(d_a, d_b, d_a, d_b)
        weights.append(float(p) * np.einsum("aibj,ba->ij", r4, m))
    return weights


def guessing_value(state: CqqState, alice: Sequence[np.ndarray], bob: Sequence[np.ndarray]) -> float:
    """sum_x P_X(x) tr(rho^x (M_x (x) N_x))"""
    return linear_value(_alice_weights(state, bob), alice)


@dataclass
class SeesawRun:
    value: float
    alice: Povm
    bob: Povm
    history: List[float] = field(default_factory=list)


def seesaw_from(state: CqqState, alice: Sequence[np.ndarray], bob: Sequence[np.ndarray],
                iters: int) -> SeesawRun:
    alice, bob = list(alice), list(bob)
    history = [guessing_value(state, alice, bob)]
    for _ in range(iters):
        alice, value = improve_povm(_alice_weights(state, bob), alice)
        history.append(value)
        bob, value = improve_povm(_bob_weights(state, alice), bob)
        history.append(value)
        if history[-1] - history[-3] < 1e-14:
            break
    return SeesawRun(history[-1], Povm(tuple(alice)), Povm(tuple(bob)), history)


def cqq_seesaw(state: CqqState, restarts: int = 10, iters: int = 100, seed: int = 0,
               threads: int = 1) -> Tuple[float, Povm, Povm]:
    d_a, d_b = state.dims
    if max(d_a, d_b) > MAX_LOCAL_DIM:
        raise DimensionTooLargeError(f"local dimensions {state.dims} exceed {MAX_LOCAL_DIM}")
    n = len(state.prior)

    def run(restart: int) -> SeesawRun:
        rng = np.random.default_rng(seed + restart)
        alice = random_povm(rng, d_a, n).elements
        bob = random_povm(rng, d_b, n).elements
        result = seesaw_from(state, alice, bob, iters)
        logger.debug(f"restart {restart}: {result.value:.12f} after {len(result.history) - 1} half-steps")
        return result

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(run, range(restarts)))
    else:
        runs = [run(restart) for restart in range(restarts)]
    best = max(runs, key=lambda result: result.value)
    logger.info(f"See-saw value {best.value:.12f} over {restarts} restarts")
    return best.value, best.alice, best.bob
