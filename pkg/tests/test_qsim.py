"""Core simulator: oracle application, instrumentation, measurement, Grover."""

import math

import numpy as np
import pytest

from advice_lab.qsim import (
    AlgorithmSpec,
    BasisLayout,
    BitStringOracle,
    ForbiddenIndexError,
    FunctionOracle,
    NonUnitaryStepError,
    PermutationOracle,
    PureState,
    QueryTrace,
    apply_oracle,
    basis_state,
    default_grover_iterations,
    euclidean_distance,
    grover_invert,
    grover_spec,
    measurement_distribution,
    query_magnitudes,
    run,
    tv_distance,
)


def dense_oracle_matrix(layout: BasisLayout, table) -> np.ndarray:
    """Independent reference: build the query operator entry by entry from the
    basis-state mapping (i, a, w) -> (i, a ^ table[i], w)."""
    mat = np.zeros((layout.dim, layout.dim))
    for i in range(layout.num_positions):
        for a in range(layout.answer_dim):
            for w in range(layout.workspace_dim):
                src = layout.index(i, a, w)
                dst = layout.index(i, a ^ int(table[i]), w)
                mat[dst, src] = 1.0
    return mat


def random_state(rng, layout) -> PureState:
    vec = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return PureState(vec / np.linalg.norm(vec), layout)


class TestLayoutAndState:
    def test_index_coords_roundtrip(self):
        lay = BasisLayout(4, 4, 3)
        seen = set()
        for i in range(4):
            for a in range(4):
                for w in range(3):
                    idx = lay.index(i, a, w)
                    assert lay.coords(idx) == (i, a, w)
                    seen.add(idx)
        assert seen == set(range(lay.dim))

    def test_state_norm_enforced(self):
        lay = BasisLayout(2, 2)
        with pytest.raises(ValueError):
            PureState(np.array([1.0, 1.0, 0.0, 0.0]), lay)

    def test_oracle_validation(self):
        with pytest.raises(ValueError):
            PermutationOracle(np.array([0, 0, 1, 2]))
        with pytest.raises(ValueError):
            PermutationOracle(np.arange(6))  # not a power of two
        with pytest.raises(ValueError):
            BitStringOracle(np.array([0, 2, 1]))
        with pytest.raises(ValueError):
            BitStringOracle(np.array([0, 1, 1]), forbidden=3)


class TestApplyOracle:
    def test_identity_permutation_xors_position(self):
        # f(i) = i, so a=0 picks up the value i itself
        lay = BasisLayout(4, 4)
        state = basis_state(lay, 3, 0)
        out = apply_oracle(state, PermutationOracle(np.arange(4)))
        assert abs(out.amplitudes[lay.index(3, 3)] - 1.0) < 1e-12

    def test_zero_bitstring_is_identity(self):
        lay = BasisLayout(4, 2, 2)
        rng = np.random.default_rng(0)
        state = random_state(rng, lay)
        out = apply_oracle(state, BitStringOracle(np.zeros(4, dtype=int)))
        assert np.allclose(out.amplitudes, state.amplitudes)

    def test_plus_one_mod_four_uniform_superposition(self):
        # Reference values from the dense matrix, not the implementation.
        lay = BasisLayout(4, 4)
        table = np.array([(x + 1) % 4 for x in range(4)])
        amps = np.zeros(lay.dim, dtype=complex)
        for i in range(4):
            amps[lay.index(i, 0)] = 0.5
        state = PureState(amps, lay)
        out = apply_oracle(state, PermutationOracle(table))
        expected = dense_oracle_matrix(lay, table) @ amps
        assert np.allclose(out.amplitudes, expected)
        for i in range(4):
            assert abs(out.amplitudes[lay.index(i, (i + 1) % 4)] - 0.5) < 1e-12

    @pytest.mark.parametrize("kind", ["perm", "bits", "func"])
    def test_matches_dense_matrix_on_random_states(self, kind):
        rng = np.random.default_rng(42)
        for _ in range(20):
            if kind == "perm":
                oracle = PermutationOracle(rng.permutation(8))
                lay = BasisLayout(8, 8, 2)
            elif kind == "func":
                oracle = FunctionOracle(rng.integers(0, 8, size=8))
                lay = BasisLayout(8, 8, 2)
            else:
                oracle = BitStringOracle(rng.integers(0, 2, size=8))
                lay = BasisLayout(8, 2, 3)
            state = random_state(rng, lay)
            out = apply_oracle(state, oracle)
            expected = dense_oracle_matrix(lay, oracle.table) @ state.amplitudes
            assert np.allclose(out.amplitudes, expected, atol=1e-12)
            assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-9

    @pytest.mark.parametrize("kind", ["perm", "bits"])
    def test_involution(self, kind):
        rng = np.random.default_rng(7)
        if kind == "perm":
            oracle = PermutationOracle(rng.permutation(8))
            lay = BasisLayout(8, 8)
        else:
            oracle = BitStringOracle(rng.integers(0, 2, size=5))
            lay = BasisLayout(5, 2, 2)
        state = random_state(rng, lay)
        twice = apply_oracle(apply_oracle(state, oracle), oracle)
        assert np.max(np.abs(twice.amplitudes - state.amplitudes)) < 1e-12

    def test_forbidden_index_rejects_mass(self):
        lay = BasisLayout(4, 2)
        oracle = BitStringOracle(np.array([1, 0, 1, 0]), forbidden=2)
        with pytest.raises(ForbiddenIndexError):
            apply_oracle(basis_state(lay, 2), oracle)
        # mass elsewhere is fine
        apply_oracle(basis_state(lay, 1), oracle)

    def test_layout_mismatch(self):
        lay = BasisLayout(4, 2)
        with pytest.raises(ValueError):
            apply_oracle(basis_state(lay, 0), PermutationOracle(np.arange(4)))


class TestQueryMagnitudes:
    def test_point_mass(self):
        lay = BasisLayout(4, 2, 2)
        q = query_magnitudes(basis_state(lay, 2, 1, 1))
        assert np.allclose(q, [0, 0, 1, 0])

    def test_uniform(self):
        lay = BasisLayout(4, 2)
        amps = np.zeros(lay.dim, dtype=complex)
        for i in range(4):
            amps[lay.index(i, 0)] = 0.5
        assert np.allclose(query_magnitudes(PureState(amps, lay)), 0.25)

    def test_moduli_squared(self):
        lay = BasisLayout(4, 2)
        amps = np.zeros(lay.dim, dtype=complex)
        for i, p in enumerate([0.5, 0.3, 0.2, 0.0]):
            amps[lay.index(i, 0)] = math.sqrt(p)
        q = query_magnitudes(PureState(amps, lay))
        assert np.allclose(q, [0.5, 0.3, 0.2, 0.0])
        assert q.sum() <= 1 + 1e-9


class TestQueryTrace:
    def test_totals_accumulate_per_step(self):
        per_step = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 1.0, 0]])
        trace = QueryTrace(per_step, 3)
        assert np.allclose(trace.totals, [1, 2, 0])
        assert trace.totals.sum() <= 3 + 1e-9

    def test_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            QueryTrace(np.array([[0.7, 0.7]]), 1)
        with pytest.raises(ValueError):
            QueryTrace(np.array([[-0.1, 0.5]]), 1)
        with pytest.raises(ValueError):
            QueryTrace(np.zeros((2, 3)), 1)


class TestRun:
    def _noop_alg(self, lay, queries=0):
        def steps(_inp):
            def step(t, amps):
                return amps
            return step
        return AlgorithmSpec("noop", lay, queries, steps)

    def test_zero_query_run(self):
        lay = BasisLayout(4, 2)
        final, trace = run(self._noop_alg(lay), BitStringOracle(np.array([1, 0, 1, 1])))
        assert np.allclose(final.amplitudes, basis_state(lay, 0).amplitudes)
        assert trace.num_queries == 0
        assert np.allclose(trace.totals, 0)

    def test_rejects_norm_breaking_step(self):
        lay = BasisLayout(4, 2)

        def steps(_inp):
            def step(t, amps):
                return amps * 0.5
            return step

        alg = AlgorithmSpec("shrink", lay, 1, steps)
        with pytest.raises(NonUnitaryStepError):
            run(alg, BitStringOracle(np.array([1, 0, 1, 1])))

    def test_deterministic_traces(self):
        f = PermutationOracle(np.random.default_rng(3).permutation(16))
        alg = grover_spec(16, 3)
        final_a, trace_a = run(alg, f, 5)
        final_b, trace_b = run(alg, f, 5)
        assert np.array_equal(final_a.amplitudes, final_b.amplitudes)
        assert np.array_equal(trace_a.per_step, trace_b.per_step)
        assert np.array_equal(trace_a.totals, trace_b.totals)

    def test_grover_trace_mass_equals_queries(self):
        f = PermutationOracle(np.random.default_rng(1).permutation(8))
        _, trace = run(grover_spec(8, 2), f, 3)
        assert abs(trace.totals.sum() - 2.0) < 1e-9


class TestMeasurement:
    def test_point_mass(self):
        lay = BasisLayout(4, 2, 2)
        dist = measurement_distribution(basis_state(lay, 3, 0, 0), "position")
        assert np.allclose(dist, [0, 0, 0, 1])

    def test_uniform(self):
        lay = BasisLayout(4, 2)
        amps = np.zeros(lay.dim, dtype=complex)
        for i in range(4):
            amps[lay.index(i, 1)] = 0.5
        assert np.allclose(measurement_distribution(PureState(amps, lay), "position"), 0.25)

    def test_post_grover_point_mass_at_four(self):
        # one round at N=4 lands exactly on the marked item: sin^2(3*pi/6) = 1
        f = PermutationOracle(np.array([2, 0, 3, 1]))
        alg = grover_spec(4, 1)
        final, _ = run(alg, f, 3)
        dist = measurement_distribution(final, "position")
        marked = int(np.flatnonzero(f.table == 3)[0])
        assert abs(dist[marked] - 1.0) < 1e-9
        assert abs(dist.sum() - 1.0) < 1e-9

    def test_register_selection(self):
        lay = BasisLayout(2, 2, 3)
        state = basis_state(lay, 1, 0, 2)
        assert np.allclose(measurement_distribution(state, "workspace"), [0, 0, 1])
        assert np.allclose(measurement_distribution(state, "answer"), [1, 0])
        with pytest.raises(ValueError):
            measurement_distribution(state, "spin")


class TestDistances:
    def test_identical(self):
        lay = BasisLayout(4, 2)
        s = basis_state(lay, 1)
        assert euclidean_distance(s, s) == 0.0
        assert tv_distance(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0

    def test_orthogonal_states(self):
        lay = BasisLayout(4, 2)
        d = euclidean_distance(basis_state(lay, 0), basis_state(lay, 1))
        assert abs(d - math.sqrt(2)) < 1e-12

    def test_disjoint_point_masses_tv_two(self):
        assert tv_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 2.0

    def test_dimension_guards(self):
        with pytest.raises(ValueError):
            tv_distance(np.array([1.0]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            euclidean_distance(basis_state(BasisLayout(4, 2), 0),
                               basis_state(BasisLayout(4, 4), 0))


class TestGroverInversion:
    def test_exact_at_four(self):
        f = PermutationOracle(np.array([1, 3, 0, 2]))
        candidate, prob, trace = grover_invert(f, 0)
        assert candidate == 2 and abs(prob - 1.0) < 1e-9
        assert trace.num_queries == 1

    def test_zero_iterations_at_two(self):
        f = PermutationOracle(np.array([1, 0]))
        _, prob, trace = grover_invert(f, 0, iterations=0)
        assert abs(prob - 0.5) < 1e-12
        assert trace.num_queries == 0

    def test_sixty_four(self):
        f = PermutationOracle(np.random.default_rng(11).permutation(64))
        candidate, prob, trace = grover_invert(f, 17)
        closed = math.sin(13 * math.asin(1 / 8)) ** 2
        assert trace.num_queries == 6
        assert abs(prob - closed) < 1e-6
        assert prob >= 0.99
        assert int(f.table[candidate]) == 17

    def test_amplification_curve_matches_closed_form(self):
        # probability after k rounds is sin^2((2k+1) * asin(1/sqrt(N)))
        n = 8
        f = PermutationOracle(np.random.default_rng(5).permutation(n))
        theta = math.asin(1 / math.sqrt(n))
        for k in range(5):
            final, _ = run(grover_spec(n, k), f, 6)
            marked = int(np.flatnonzero(f.table == 6)[0])
            prob = measurement_distribution(final, "position")[marked]
            assert abs(prob - math.sin((2 * k + 1) * theta) ** 2) < 1e-9

    def test_default_iterations(self):
        assert default_grover_iterations(4) == 1
        assert default_grover_iterations(64) == 6
        assert default_grover_iterations(1024) == 25
