from fractions import Fraction

import numpy as np
import pytest
import torch

from lssd.core_model import CqqState, Povm, classical_diagonal_state, example2_state, validate_povm
from lssd.errors import DimensionTooLargeError
from lssd.quantum import random_povm
from lssd.seesaw import (
    _alice_weights,
    _inverse_sqrt_torch,
    cqq_seesaw,
    guessing_value,
    improve_povm,
    povm_from_factors,
    seesaw_from,
)


def product_basis_state():
    """|00> for x = 0 and |11> for x = 1: locally distinguishable."""
    states = []
    for x in range(2):
        v = np.zeros(4, dtype=complex)
        v[x * 2 + x] = 1
        states.append(np.outer(v, v.conj()))
    return CqqState((Fraction(1, 2), Fraction(1, 2)), tuple(states), (2, 2))


def test_factors_give_valid_povm():
    rng = np.random.default_rng(0)
    factors = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
    assert validate_povm(Povm(tuple(povm_from_factors(factors))))


def test_newton_schulz_inverse_sqrt():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    s = a.conj().T @ a + np.eye(3)
    inv_sqrt = _inverse_sqrt_torch(torch.from_numpy(s)).numpy()
    assert np.allclose(inv_sqrt @ s @ inv_sqrt, np.eye(3), atol=1e-9)


def test_improve_never_worse():
    rng = np.random.default_rng(2)
    state = example2_state()
    bob = random_povm(rng, 3, 2).elements
    alice = random_povm(rng, 3, 2).elements
    start = guessing_value(state, alice, bob)
    improved, value = improve_povm(_alice_weights(state, bob), alice)
    assert value >= start
    assert guessing_value(state, improved, bob) == pytest.approx(value, abs=1e-12)


def test_history_is_monotone():
    rng = np.random.default_rng(3)
    state = example2_state()
    run = seesaw_from(state, random_povm(rng, 3, 2).elements, random_povm(rng, 3, 2).elements, iters=5)
    assert all(b >= a - 1e-12 for a, b in zip(run.history, run.history[1:]))
    assert run.value == run.history[-1]


def test_locally_distinguishable_states():
    value, alice, bob = cqq_seesaw(product_basis_state(), restarts=3, iters=100, seed=0)
    assert value == pytest.approx(1.0, abs=1e-8)
    assert validate_povm(alice) and validate_povm(bob)


def test_dimension_limit():
    big = CqqState((Fraction(1),), (np.eye(81, dtype=complex) / 81,), (9, 9))
    with pytest.raises(DimensionTooLargeError):
        cqq_seesaw(big)


@pytest.mark.slow
def test_classical_embedding_matches_classical_value(theorem1):
    value, _, _ = cqq_seesaw(classical_diagonal_state(theorem1), restarts=10, iters=200, seed=0)
    assert value <= 0.4 + 1e-9
    assert value == pytest.approx(0.4, abs=1e-6)


@pytest.mark.slow
def test_cloning_attack_state():
    value, _, _ = cqq_seesaw(example2_state(), restarts=10, iters=100, seed=0, threads=2)
    assert value >= 9 / 16 - 1e-4
