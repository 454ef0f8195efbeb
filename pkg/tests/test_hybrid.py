"""Collision finder, perturbation-bound verifiers, box experiment."""

import math

import numpy as np
import pytest

from advice_lab.adapters import parity_box_algorithm
from advice_lab.hybrid import (
    ParityAdviceScheme,
    box_experiment,
    collision_in_window,
    expectation_check,
    verify_swapping,
    verify_tv,
)
from advice_lab.qsim import (
    AlgorithmSpec,
    BasisLayout,
    BitStringOracle,
    PermutationOracle,
    PureState,
    default_grover_iterations,
    grover_spec,
    run,
)
from advice_lab.util import int_to_bits


def brute_force_pair(members, window, n):
    """Independent oracle: scan all pairs for one agreeing outside the window."""
    outside = ((1 << n) - 1) ^ sum(1 << i for i in window)
    items = sorted(int(v) for v in members)
    for i, a in enumerate(items):
        for b in items[i + 1:]:
            if (a ^ b) & outside == 0:
                return a, b
    return None


class TestCollisionFinder:
    def test_half_space_example(self):
        # n=4, m=1: all strings with bit 0 clear, window = last two coordinates
        members = [x for x in range(16) if not x & 1]
        x, y = collision_in_window(members, [2, 3], 4)
        assert x != y and x in members and y in members
        assert (x ^ y) & 0b0011 == 0

    def test_two_string_class(self):
        x, y = collision_in_window([0b00, 0b11], [0, 1], 2)
        assert (x, y) == (0, 3)

    def test_constructed_flips_inside_window(self):
        # strings equal outside the window by construction
        members = [0b0000, 0b0101, 0b0001, 0b0100]
        x, y = collision_in_window(members, [0, 2], 4)
        assert (x ^ y) & 0b1010 == 0

    def test_matches_brute_force_on_random_classes(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            n = int(rng.integers(4, 11))
            m = int(rng.integers(1, min(n - 1, 6) + 1))
            members = rng.choice(1 << n, size=2 ** (n - m), replace=False)
            window = sorted(int(i) for i in rng.choice(n, size=m + 1, replace=False))
            x, y = collision_in_window(members, window, n)
            outside = ((1 << n) - 1) ^ sum(1 << i for i in window)
            assert x != y and (x ^ y) & outside == 0
            assert {x, y} <= set(int(v) for v in members)
            assert brute_force_pair(members, window, n) is not None

    def test_rejects_when_no_pair_exists(self):
        # too small a set, all pairwise different outside the window
        with pytest.raises(ValueError):
            collision_in_window([0b0000, 0b1000], [0, 1], 4)


class TestParityPartitions:
    def test_class_sizes_and_membership(self):
        scheme = ParityAdviceScheme(2)
        n = 8
        part = scheme.partition(n, "10")
        assert part.size == 2 ** (n - 2)
        assert part.meets_size_bound()
        for x in part.members[:: max(1, part.size // 16)]:
            assert scheme.advice_string(int_to_bits(int(x), n)) == "10"

    def test_partitions_cover_everything(self):
        scheme = ParityAdviceScheme(3)
        n = 6
        total = 0
        for key in range(8):
            alpha = format(key, "03b")[::-1]
            total += scheme.partition(n, alpha).size
        assert total == 2 ** n

    def test_enumeration_cap(self):
        with pytest.raises(ValueError):
            ParityAdviceScheme(2).partition(13, "00")


class TestVerifySwapping:
    def test_identical_oracles(self):
        from advice_lab.advice import parity_preprocess
        bits = np.random.default_rng(1).integers(0, 2, size=8)
        pad_alg = parity_box_algorithm(parity_preprocess(bits, 2), 3)
        rep = verify_swapping(pad_alg, BitStringOracle(bits, forbidden=3),
                              BitStringOracle(bits.copy(), forbidden=3), 3)
        assert rep.bound == 0.0 and rep.actual == 0.0 and rep.holds
        assert rep.delta_set == ()

    def test_adapter_avoiding_the_difference(self):
        from advice_lab.advice import parity_preprocess
        bits = np.zeros(8, dtype=int)
        other = bits.copy()
        other[6] = 1  # group 1; the adapter for j in group 0 never reads it
        pad = parity_preprocess(bits, 2)
        alg = parity_box_algorithm(pad, 1)
        rep = verify_swapping(alg, BitStringOracle(bits, forbidden=1),
                              BitStringOracle(other, forbidden=1), 1)
        assert rep.bound == 0.0 and rep.actual == 0.0 and rep.holds

    def test_grover_random_single_swap_trials(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = 16
            f = rng.permutation(n)
            a, b = rng.choice(n, size=2, replace=False)
            g = f.copy()
            g[[a, b]] = g[[b, a]]
            alg = grover_spec(n, default_grover_iterations(n))
            rep = verify_swapping(alg, PermutationOracle(f), PermutationOracle(g),
                                  int(f[a]))
            assert rep.holds, rep

    def test_oracle_shape_mismatch(self):
        alg = grover_spec(4, 1)
        with pytest.raises(ValueError):
            verify_swapping(alg, PermutationOracle(np.arange(4)),
                            BitStringOracle(np.array([0, 1, 0, 1])), 0)


class TestVerifyTv:
    def test_equal_states(self):
        lay = BasisLayout(4, 2)
        state = PureState(np.full(8, math.sqrt(1 / 8)), lay)
        rep = verify_tv(state, state)
        assert rep.tv == 0.0 and rep.holds

    def test_orthogonal_basis_states(self):
        from advice_lab.qsim import basis_state
        lay = BasisLayout(4, 2)
        rep = verify_tv(basis_state(lay, 0), basis_state(lay, 1))
        assert abs(rep.tv - 2.0) < 1e-12
        assert abs(rep.bound - 4 * math.sqrt(2)) < 1e-12
        assert rep.holds

    def test_random_state_pairs(self):
        rng = np.random.default_rng(3)
        lay = BasisLayout(8, 2, 2)
        for _ in range(100):
            va = rng.normal(size=lay.dim) + 1j * rng.normal(size=lay.dim)
            vb = rng.normal(size=lay.dim) + 1j * rng.normal(size=lay.dim)
            a = PureState(va / np.linalg.norm(va), lay)
            b = PureState(vb / np.linalg.norm(vb), lay)
            for register in ("position", "answer", "workspace"):
                assert verify_tv(a, b, register).holds


class TestExpectationCheck:
    def test_full_read_adapter_has_unit_mean(self):
        # one group covering everything: every allowed position is read once,
        # so the sampled mean is exactly T/(N-1) = 1
        from advice_lab.advice import parity_preprocess
        bits = np.random.default_rng(4).integers(0, 2, size=16)
        pad = parity_preprocess(bits, 1)
        alg = parity_box_algorithm(pad, 9)
        _, trace = run(alg, BitStringOracle(bits, forbidden=9), 9)
        rep = expectation_check(trace.totals, 9, alg.num_queries,
                                np.random.default_rng(5), samples=2000)
        assert rep.expected == 1.0
        assert rep.mean == 1.0
        assert rep.within_3se


class TestBoxExperiment:
    def test_parity_adapter_all_hold(self):
        result = box_experiment(8, 2, ParityAdviceScheme(2), parity_box_algorithm,
                                trials=30, seed=42)
        assert result.all_swaps_hold
        assert result.all_expectations_within
        for rec in result.records:
            assert rec.class_size == 2 ** 6
            assert len(rec.window) == 3
            # pair members really sit in the advice class and differ inside it
            outside = ((1 << 8) - 1) ^ sum(1 << i for i in rec.window)
            assert (rec.x ^ rec.y) & outside == 0

    def test_zero_query_algorithm_gives_zero_distances(self):
        lay = BasisLayout(8, 2, 1)

        def factory(pad, j):
            def steps(_inp):
                def step(t, amps):
                    return amps
                return step
            return AlgorithmSpec("idle", lay, 0, steps)

        result = box_experiment(8, 2, ParityAdviceScheme(2), factory,
                                trials=10, seed=7)
        for rec in result.records:
            assert rec.swap.actual == 0.0
            assert rec.swap.bound == 0.0
            assert rec.expectation.mean == 0.0
        assert result.all_swaps_hold

    def test_size_cap_and_bad_m(self):
        with pytest.raises(ValueError):
            box_experiment(16, 2, ParityAdviceScheme(2), parity_box_algorithm, 1, 0)
        with pytest.raises(ValueError):
            box_experiment(8, 8, ParityAdviceScheme(8), parity_box_algorithm, 1, 0)
