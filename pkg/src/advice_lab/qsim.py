"""Exact statevector simulation of oracle query algorithms.

The state space is a triple register (position, answer, workspace).  A query
XORs the oracle's answer for the position coordinate into the answer register,
which is unitary for any oracle table.  Between queries the algorithm applies
arbitrary norm-preserving transformations of the full state.  Every query step
is instrumented: the squared amplitude mass sitting on each position right
before the query is recorded, per step and accumulated over the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .util import NORM_TOL

FORBIDDEN_MASS_TOL = 1e-12

REGISTERS = ("position", "answer", "workspace")


class ForbiddenIndexError(RuntimeError):
    """Raised when a query puts amplitude mass on a position that is off limits."""


class NonUnitaryStepError(RuntimeError):
    """Raised when a step transformation fails to preserve the state norm."""


# ---------------------------------------------------------------------------
# State space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisLayout:
    """Shape of the register triple.  Basis index = (position, answer, workspace)
    flattened in row-major order."""

    num_positions: int
    answer_dim: int
    workspace_dim: int = 1

    def __post_init__(self):
        if self.num_positions < 2:
            raise ValueError("need at least two query positions")
        if self.answer_dim < 2 or self.workspace_dim < 1:
            raise ValueError("bad register dimensions")

    @property
    def dim(self) -> int:
        return self.num_positions * self.answer_dim * self.workspace_dim

    def index(self, position: int, answer: int, workspace: int = 0) -> int:
        return (position * self.answer_dim + answer) * self.workspace_dim + workspace

    def coords(self, index: int) -> tuple[int, int, int]:
        index, workspace = divmod(index, self.workspace_dim)
        position, answer = divmod(index, self.answer_dim)
        return position, answer, workspace

    def axis(self, register: str) -> int:
        if register not in REGISTERS:
            raise ValueError(f"unknown register {register!r}")
        return REGISTERS.index(register)


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex amplitude vector over a BasisLayout."""

    amplitudes: np.ndarray
    layout: BasisLayout

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.layout.dim,):
            raise ValueError("amplitude vector does not match layout dimension")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} is not 1 within {NORM_TOL}")

    def grid(self) -> np.ndarray:
        """View as (position, answer, workspace)."""
        lay = self.layout
        return self.amplitudes.reshape(lay.num_positions, lay.answer_dim, lay.workspace_dim)


def basis_state(layout: BasisLayout, position: int, answer: int = 0, workspace: int = 0) -> PureState:
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[layout.index(position, answer, workspace)] = 1.0
    return PureState(amps, layout)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def _check_power_of_two(n: int):
    if n & (n - 1) or n < 2:
        raise ValueError(f"XOR answers need a power-of-two range, got {n}")


@dataclass(frozen=True)
class PermutationOracle:
    """A bijection on [N], N = 2^n.  Queries XOR the n-bit value f(i) into the
    answer register."""

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int64)
        object.__setattr__(self, "table", table)
        n = len(table)
        _check_power_of_two(n)
        if not np.array_equal(np.sort(table), np.arange(n)):
            raise ValueError("table is not a permutation")

    @property
    def num_positions(self) -> int:
        return len(self.table)

    @property
    def answer_dim(self) -> int:
        return len(self.table)

    @property
    def forbidden(self) -> Optional[int]:
        return None


@dataclass(frozen=True)
class FunctionOracle:
    """An arbitrary map [N] -> [N] under the same XOR convention.  Used for
    hybrid oracles that are constant on part of the domain."""

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int64)
        object.__setattr__(self, "table", table)
        n = len(table)
        _check_power_of_two(n)
        if table.min() < 0 or table.max() >= n:
            raise ValueError("table values out of range")

    @property
    def num_positions(self) -> int:
        return len(self.table)

    @property
    def answer_dim(self) -> int:
        return len(self.table)

    @property
    def forbidden(self) -> Optional[int]:
        return None


@dataclass(frozen=True)
class BitStringOracle:
    """An N-bit string; queries XOR bit x_j into a two-dimensional answer
    register.  An optional forbidden index rejects any query touching it."""

    bits: np.ndarray
    forbidden: Optional[int] = None

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int64)
        object.__setattr__(self, "bits", bits)
        if len(bits) < 2:
            raise ValueError("need at least two positions")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("bits must be 0/1")
        if self.forbidden is not None and not 0 <= self.forbidden < len(bits):
            raise ValueError("forbidden index out of range")

    @property
    def num_positions(self) -> int:
        return len(self.bits)

    @property
    def answer_dim(self) -> int:
        return 2

    @property
    def table(self) -> np.ndarray:
        return self.bits


Oracle = PermutationOracle | FunctionOracle | BitStringOracle


def oracle_delta(a: Oracle, b: Oracle) -> np.ndarray:
    """Positions where two same-shape oracles disagree."""
    ta, tb = a.table, b.table
    if len(ta) != len(tb) or a.answer_dim != b.answer_dim:
        raise ValueError("oracles have different shapes")
    return np.flatnonzero(ta != tb)


def apply_oracle(state: PureState, oracle: Oracle) -> PureState:
    """One query: basis state (i, a, w) maps to (i, a XOR table[i], w)."""
    lay = state.layout
    if lay.num_positions != oracle.num_positions or lay.answer_dim != oracle.answer_dim:
        raise ValueError("state layout incompatible with oracle")
    grid = state.grid()
    if oracle.forbidden is not None:
        mass = float(np.sum(np.abs(grid[oracle.forbidden]) ** 2))
        if mass > FORBIDDEN_MASS_TOL:
            raise ForbiddenIndexError(
                f"query magnitude {mass:.3e} on forbidden position {oracle.forbidden}")
    table = np.asarray(oracle.table)
    xor_cols = np.arange(lay.answer_dim)[None, :] ^ table[:, None]
    out = grid[np.arange(lay.num_positions)[:, None], xor_cols, :]
    return PureState(out.reshape(lay.dim), lay)


# ---------------------------------------------------------------------------
# Instrumentation
# ---------------------------------------------------------------------------

def query_magnitudes(state: PureState) -> np.ndarray:
    """Squared amplitude mass per position coordinate; sums to 1."""
    grid = state.grid()
    return np.sum(np.abs(grid) ** 2, axis=(1, 2))


@dataclass(frozen=True)
class QueryTrace:
    """Per-step and accumulated query magnitudes of one run."""

    per_step: np.ndarray  # shape (T, N): row t = magnitudes right before query t+1
    num_queries: int
    totals: np.ndarray = field(init=False)  # shape (N,)

    def __post_init__(self):
        per_step = np.asarray(self.per_step, dtype=np.float64)
        object.__setattr__(self, "per_step", per_step)
        if per_step.shape[0] != self.num_queries:
            raise ValueError("per-step rows must match the query count")
        if per_step.size and per_step.min() < 0:
            raise ValueError("negative query magnitude")
        if per_step.size and per_step.sum(axis=1).max() > 1 + NORM_TOL:
            raise ValueError("a step's magnitudes exceed unit mass")
        totals = per_step.sum(axis=0) if per_step.size else np.zeros(per_step.shape[1])
        object.__setattr__(self, "totals", totals)
        if totals.sum() > self.num_queries + NORM_TOL:
            raise ValueError("total query magnitude exceeds the query count")


# ---------------------------------------------------------------------------
# Algorithms
# ---------------------------------------------------------------------------

StepFn = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AlgorithmSpec:
    """A T-query algorithm: step transformations interleaved with queries.

    ``steps(run_input)`` returns the step function used for one run; it is
    called with (t, amplitudes) for t = 0..T and must preserve the norm of the
    states it actually receives.  ``derive_oracle`` optionally maps the base
    oracle plus the run input to the oracle actually queried (e.g. a predicate
    bit string derived from a permutation); queries to the derived oracle are
    charged one-for-one.
    """

    name: str
    layout: BasisLayout
    num_queries: int
    steps: Callable[[object], StepFn]
    output_register: str = "position"
    advice: str = ""
    derive_oracle: Optional[Callable[[Oracle, object], Oracle]] = None

    def __post_init__(self):
        if self.num_queries < 0:
            raise ValueError("negative query count")
        self.layout.axis(self.output_register)


def run(alg: AlgorithmSpec, oracle: Oracle, run_input=None) -> tuple[PureState, QueryTrace]:
    """Execute: step 0, then T rounds of (record magnitudes, query, step)."""
    effective = alg.derive_oracle(oracle, run_input) if alg.derive_oracle else oracle
    lay = alg.layout
    if lay.num_positions != effective.num_positions or lay.answer_dim != effective.answer_dim:
        raise ValueError("algorithm layout incompatible with oracle")
    step = alg.steps(run_input)
    amps = basis_state(lay, 0).amplitudes

    def checked(t: int, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=np.complex128)
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > NORM_TOL:
            raise NonUnitaryStepError(f"step {t} of {alg.name} produced norm {norm}")
        return vec

    amps = checked(0, step(0, amps))
    per_step = np.empty((alg.num_queries, lay.num_positions), dtype=np.float64)
    state = PureState(amps, lay)
    for t in range(alg.num_queries):
        per_step[t] = query_magnitudes(state)
        state = apply_oracle(state, effective)
        state = PureState(checked(t + 1, step(t + 1, state.amplitudes)), lay)
    return state, QueryTrace(per_step, alg.num_queries)


# ---------------------------------------------------------------------------
# Measurement and distances
# ---------------------------------------------------------------------------

def measurement_distribution(state: PureState, register: str = "position") -> np.ndarray:
    """Marginal Born probabilities of one register."""
    axis = state.layout.axis(register)
    probs = np.abs(state.grid()) ** 2
    other = tuple(i for i in range(3) if i != axis)
    dist = probs.sum(axis=other)
    total = dist.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"distribution sums to {total}")
    return dist


def euclidean_distance(a: PureState, b: PureState) -> float:
    if a.layout != b.layout:
        raise ValueError("states live in different layouts")
    return float(np.linalg.norm(a.amplitudes - b.amplitudes))


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """1-norm distance between probability vectors (no 1/2 factor)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("distributions have different sizes")
    return float(np.abs(p - q).sum())


# ---------------------------------------------------------------------------
# Grover inversion, one query per amplification round
# ---------------------------------------------------------------------------

def default_grover_iterations(n_elements: int) -> int:
    return int(math.floor((math.pi / 4) * math.sqrt(n_elements)))


def grover_spec(n_elements: int, iterations: int) -> AlgorithmSpec:
    """Search for the unique position satisfying a derived predicate.

    The answer register is held in the |0>-|1> difference state so a predicate
    query kicks back a phase flip; each round then reflects the position
    register about the uniform state.
    """
    lay = BasisLayout(n_elements, 2, 1)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    uniform = np.full(n_elements, 1.0 / math.sqrt(n_elements))

    def steps(_run_input) -> StepFn:
        def step(t: int, amps: np.ndarray) -> np.ndarray:
            grid = amps.reshape(n_elements, 2)
            if t == 0:
                return np.outer(uniform, minus).reshape(-1).astype(np.complex128)
            mean = grid.mean(axis=0, keepdims=True)
            return (2.0 * mean - grid).reshape(-1)
        return step

    def derive(oracle: Oracle, run_input) -> BitStringOracle:
        marks = (np.asarray(oracle.table) == int(run_input)).astype(np.int64)
        return BitStringOracle(marks)

    return AlgorithmSpec(
        name=f"grover[{iterations}]",
        layout=lay,
        num_queries=iterations,
        steps=steps,
        output_register="position",
        derive_oracle=derive,
    )


def grover_invert(f: PermutationOracle, y: int, iterations: Optional[int] = None):
    """Amplify the preimage of y under f; returns (candidate, exact success
    probability of the candidate, trace)."""
    n = f.num_positions
    if iterations is None:
        iterations = default_grover_iterations(n)
    alg = grover_spec(n, iterations)
    final, trace = run(alg, f, y)
    dist = measurement_distribution(final, "position")
    candidate = int(np.argmax(dist))
    return candidate, float(dist[candidate]), trace
