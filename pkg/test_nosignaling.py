import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lssd.classical import pc_bruteforce
from lssd.core_model import JointDistribution, noisy_bit_game, point_mass, product_game
from lssd.errors import (
    BudgetExceededError,
    KOutOfRangeError,
    NotNormalizedError,
    ParseError,
    SignalingError,
)
from lssd.nosignaling import (
    NoSignalingBox,
    box_value,
    build_ns_lp,
    dump_box,
    load_box,
    parse_box,
    pns_binary_inputs,
    pns_exact,
    qk_box,
    qk_objective,
    save_box,
    table1_functions,
    validate_box,
)
from lssd.simplex import simplex_max

F = Fraction


@st.composite
def binary_input_games(draw, x_sizes=(2,)):
    alphabets = (draw(st.sampled_from(x_sizes)), 2, 2)
    size = alphabets[0] * 4
    weights = draw(st.lists(st.integers(0, 6), min_size=size, max_size=size).filter(any))
    total = sum(weights)
    indices = itertools.product(*(range(n) for n in alphabets))
    return JointDistribution.from_entries(alphabets, {i: F(w, total) for i, w in zip(indices, weights) if w})


class TestExactLp:
    def test_theorem1_value(self, theorem1):
        value, box = pns_exact(theorem1)
        assert value == F(1, 2)
        assert validate_box(box)
        assert box_value(theorem1, box) == F(1, 2)

    def test_full_lp_agrees_with_reduced(self, theorem1):
        lp = build_ns_lp(theorem1)
        assert lp.num_vars == 36
        assert simplex_max(lp)[0] == F(1, 2)
        assert pns_exact(theorem1, reduced=False)[0] == F(1, 2)

    def test_point_mass(self, point_mass_game):
        value, box = pns_exact(point_mass_game)
        assert value == 1
        assert box((1, 1), (0, 1)) == 1

    def test_three_parties(self):
        dist = point_mass((2, 2, 1, 2), (1, 0, 0, 1))
        assert pns_exact(dist)[0] == 1

    def test_noisy_bit_collapses_to_classical(self):
        dist = noisy_bit_game(F(3, 10))
        assert pns_exact(dist)[0] == pc_bruteforce(dist)[0] == F(1, 2)

    def test_product_is_superadditive(self):
        single = noisy_bit_game(F(1, 4))
        value = pns_exact(single)[0]
        assert pns_exact(product_game(single, single))[0] >= value * value


class TestQkBox:
    def test_pr_box(self):
        box = qk_box(2, 2)
        assert validate_box(box)
        assert sorted(q for _, _, q in box.support()) == [F(1, 2)] * 8
        assert box((0, 1), (1, 1)) == F(1, 2)
        assert box((0, 0), (1, 1)) == 0

    def test_unused_outputs_are_zero(self):
        box = qk_box(2, 3)
        for inputs in box.input_tuples():
            for other in range(3):
                assert box((2, other), inputs) == 0
                assert box((other, 2), inputs) == 0

    @pytest.mark.parametrize("k, d", [(2, 2), (2, 4), (3, 3), (3, 5), (5, 5)])
    def test_no_signaling(self, k, d):
        assert validate_box(qk_box(k, d))

    @pytest.mark.parametrize("k, d", [(1, 3), (4, 3)])
    def test_k_out_of_range(self, k, d):
        with pytest.raises(KOutOfRangeError):
            qk_box(k, d)


class TestBoxValidation:
    def test_signaling_box(self):
        # Bob's output reveals Alice's input
        box = NoSignalingBox.from_function((2, 2, 2), lambda o, a: 1 if o == (0, a[0]) else 0)
        with pytest.raises(SignalingError):
            validate_box(box)

    def test_unnormalized_box(self):
        box = NoSignalingBox.from_function((2, 2, 2), lambda o, a: F(1, 8))
        with pytest.raises(NotNormalizedError):
            validate_box(box)

    def test_box_file(self, tmp_path, theorem1):
        _, box = pns_exact(theorem1)
        path = tmp_path / "box.txt"
        save_box(box, path)
        assert path.read_text().startswith("lssd-box v1\nparties 2\nalphabets 3 2 2\n")
        loaded = load_box(path)
        assert loaded == box
        assert validate_box(loaded)

    def test_box_parse_error(self):
        with pytest.raises(ParseError) as info:
            parse_box("lssd-box v1\nparties 2\nalphabets 2 2 2\n0 0 0 0 1/2 extra\n")
        assert info.value.line == 4

    def test_dump_lists_support_only(self):
        lines = dump_box(qk_box(2, 2)).splitlines()
        assert len(lines) == 3 + 8


class TestPermutationFormula:
    def test_theorem1_witness(self, theorem1):
        f, g = table1_functions()
        assert qk_objective(theorem1, 2, f, g) == F(1, 2)
        witness = pns_binary_inputs(theorem1)
        assert witness.value == F(1, 2)
        assert witness.k == 2
        assert qk_objective(theorem1, witness.k, witness.f, witness.g) == F(1, 2)

    def test_binary_outputs_fall_back_to_classical(self):
        dist = noisy_bit_game(F(1, 4))
        witness = pns_binary_inputs(dist)
        assert witness.value == F(9, 16)

    def test_threads(self, theorem1):
        assert pns_binary_inputs(theorem1, threads=3).value == F(1, 2)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            pns_binary_inputs(point_mass((6, 2, 2), (0, 0, 0)))

    @settings(max_examples=25, deadline=None)
    @given(binary_input_games(x_sizes=(3,)))
    def test_matches_lp(self, dist):
        assert pns_binary_inputs(dist).value == pns_exact(dist)[0]


class TestBinaryInputBounds:
    @settings(max_examples=60, deadline=None)
    @given(binary_input_games(x_sizes=(2,)))
    def test_two_outputs_no_advantage(self, dist):
        assert pns_exact(dist)[0] == pc_bruteforce(dist)[0]

    @settings(max_examples=60, deadline=None)
    @given(binary_input_games(x_sizes=(3, 4)))
    def test_gap_bounds(self, dist):
        pc = pc_bruteforce(dist)[0]
        pns = pns_exact(dist)[0]
        assert pc <= pns <= min(2 * pc, pc + F(1, 8))

    @pytest.mark.slow
    @settings(max_examples=500, deadline=None)
    @given(binary_input_games(x_sizes=(2,)))
    def test_two_outputs_no_advantage_many(self, dist):
        assert pns_exact(dist)[0] == pc_bruteforce(dist)[0]

    @pytest.mark.slow
    @settings(max_examples=500, deadline=None)
    @given(binary_input_games(x_sizes=(3, 4)))
    def test_gap_bounds_many(self, dist):
        pc = pc_bruteforce(dist)[0]
        pns = pns_exact(dist)[0]
        assert pc <= pns <= min(2 * pc, pc + F(1, 8))
