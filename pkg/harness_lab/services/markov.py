"""
Time-inhomogeneous Markov chains built from Wilson 6-j weights.

Three chain families share one interface:

- ``MainChain``: xi on {0..N}, jumps up, Case 1 or Case 2 parameters.
- ``KChain``: xi^(K) on {0..K}, the C -> -infinity limit of the Case 1 chain.
- ``DualChain``: the downward chain on {K..N} that runs on (A+N-C, inf).

Joint laws on finite time grids are enumerated exactly over monotone state
tuples; trajectories are sampled by inverse CDF with one RNG substream per
path index.
"""

import logging
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from harness_lab.models.errors import (
    EmptyConditioning,
    GridTooLarge,
    InvalidParams,
    NonStochastic,
    TimeOutOfDomain,
    WrongCase,
)
from harness_lab.models.model import Case, Mode
from harness_lab.services.scalar import Scalar, as_mode, parse_scalar, same_mode
from harness_lab.services.wilson import (
    DiscreteLaw,
    LawParams6j,
    pi_law,
    pi_weight,
    wilson_law,
    wilson_weight,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATOMS = 10**7
FLOAT_STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class ChainParams:
    A: Scalar
    B: Scalar
    C: Scalar
    N: int
    case: Case
    mode: Mode = Mode.EXACT

    def __post_init__(self):
        found = same_mode(self.A, self.B, self.C)
        if found is not None and found is not self.mode:
            raise InvalidParams("mode", f"parameters are {found.value}, expected {self.mode.value}")
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, as_mode(getattr(self, name), self.mode))
        validate_chain_params(self)

    @classmethod
    def create(cls, A, B, C, N: int, *, mode: Mode = Mode.EXACT, case: Optional[Case] = None):
        """Build parameters from strings or numbers, inferring the case from C when omitted."""
        A, B, C = (parse_scalar(value, mode) for value in (A, B, C))
        if case is None:
            case = infer_case(A, B, C, N)
        return cls(A, B, C, int(N), case, mode)

    def label(self) -> str:
        return f"A={self.A},B={self.B},C={self.C},N={self.N}"

    def half(self, value) -> Scalar:
        return as_mode(value, self.mode) / 2


def infer_case(A, B, C, N: int) -> Case:
    if C < -A - N + 1:
        return Case.CASE1
    if C > A + N:
        return Case.CASE2
    raise InvalidParams("C < -A-N+1 (Case 1) or C > A+N (Case 2)", f"A={A}, C={C}, N={N}")


def validate_chain_params(p: ChainParams) -> None:
    if not isinstance(p.N, int) or p.N < 0:
        raise InvalidParams("N >= 0", f"N={p.N}")
    if not p.A > -as_mode(1, p.mode) / 2:
        raise InvalidParams("A > -1/2", f"A={p.A}")
    if not -p.A < p.B < p.A + 1:
        raise InvalidParams("B in (-A, A+1)", f"A={p.A}, B={p.B}")
    if p.case is Case.CASE1 and not p.C < -p.A - p.N + 1:
        raise InvalidParams("C < -A-N+1", f"Case 1 with A={p.A}, C={p.C}, N={p.N}")
    if p.case is Case.CASE2 and not p.C > p.A + p.N:
        raise InvalidParams("C > A+N", f"Case 2 with A={p.A}, C={p.C}, N={p.N}")


@dataclass(frozen=True)
class TimeDomain:
    """Open interval (lower, upper); ``None`` stands for an infinite endpoint."""

    lower: Optional[Scalar]
    upper: Optional[Scalar]
    secondary: Optional["TimeDomain"] = None

    def contains(self, t) -> bool:
        if self.lower is not None and not t > self.lower:
            return False
        if self.upper is not None and not t < self.upper:
            return False
        return True

    def require(self, *times) -> None:
        for t in times:
            if not self.contains(t):
                raise TimeOutOfDomain(f"time {t} outside {self}")

    def interior_point(self) -> Scalar:
        if self.lower is not None and self.upper is not None:
            return (self.lower + self.upper) / 2
        if self.lower is not None:
            return self.lower + 1
        if self.upper is not None:
            return self.upper - 1
        return 0

    def __str__(self) -> str:
        lower = "-inf" if self.lower is None else str(self.lower)
        upper = "inf" if self.upper is None else str(self.upper)
        return f"({lower}, {upper})"


def time_domain(p: ChainParams) -> TimeDomain:
    lower = -(p.A + p.B)
    if p.case is Case.CASE1:
        return TimeDomain(lower, None, secondary=TimeDomain(None, p.C - p.A - p.N))
    return TimeDomain(lower, p.C - p.A - p.N)


def _item(value):
    return value.item() if isinstance(value, np.generic) else value


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """P[s,t] over consecutive ``states``; object dtype holds Fractions, float64 otherwise."""

    s: Scalar
    t: Scalar
    states: Tuple[int, ...]
    entries: np.ndarray

    @classmethod
    def from_rows(cls, s, t, states: Sequence[int], rows: Sequence[Sequence[Scalar]], mode: Mode):
        dtype = object if mode is Mode.EXACT else np.float64
        return cls(s, t, tuple(states), np.array([list(row) for row in rows], dtype=dtype))

    @property
    def dims(self) -> Tuple[int, int]:
        return self.entries.shape

    def _index(self, state: int) -> int:
        return state - self.states[0]

    def entry(self, k: int, n: int) -> Scalar:
        return _item(self.entries[self._index(k), self._index(n)])

    def row(self, k: int) -> Dict[int, Scalar]:
        """Non-zero entries of row ``k`` keyed by target state."""
        return {n: value for n, value in zip(self.states, self.entries[self._index(k)].tolist()) if value != 0}

    def row_sums(self) -> List[Scalar]:
        return self.entries.sum(axis=1).tolist()

    def __matmul__(self, other: "TransitionMatrix") -> "TransitionMatrix":
        if self.states != other.states:
            raise ValueError("state spaces differ")
        return TransitionMatrix(self.s, other.t, self.states, self.entries @ other.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return (self.s, self.t, self.states) == (other.s, other.t, other.states) and np.array_equal(
            self.entries, other.entries
        )

    def max_abs_diff(self, other: "TransitionMatrix") -> Scalar:
        return _item(np.abs(self.entries - other.entries).max())


def _check_stochastic(matrix: TransitionMatrix, mode: Mode) -> TransitionMatrix:
    for state, row, total in zip(matrix.states, matrix.entries.tolist(), matrix.row_sums()):
        if mode is Mode.EXACT:
            ok = total == 1 and all(value >= 0 for value in row)
        else:
            ok = abs(total - 1) <= FLOAT_STOCHASTIC_TOL and all(
                value >= -FLOAT_STOCHASTIC_TOL for value in row
            )
        if not ok:
            raise NonStochastic(f"row {state} of P[{matrix.s},{matrix.t}] sums to {total}")
    return matrix


def _ordered(s, t) -> None:
    if not s < t:
        raise TimeOutOfDomain(f"expected s < t, got s={s}, t={t}")


@lru_cache(maxsize=4096)
def transition_matrix(p: ChainParams, s, t) -> TransitionMatrix:
    """P_{s,t}(k, n) = p_{n-k, N-k}(A + t/2 + k, -A - s + t/2 - k, C - t/2)."""
    s, t = as_mode(s, p.mode), as_mode(t, p.mode)
    time_domain(p).require(s, t)
    _ordered(s, t)
    zero = as_mode(0, p.mode)
    states = tuple(range(p.N + 1))
    rows = []
    for k in states:
        law = LawParams6j(p.A + t / 2 + k, -p.A - s + t / 2 - k, p.C - t / 2, p.N - k)
        rows.append(
            tuple(zero if n < k else wilson_weight(n - k, law, validate=False) for n in states)
        )
    logger.debug(f"built P[{s},{t}] for {p.label()}")
    return _check_stochastic(TransitionMatrix.from_rows(s, t, states, rows, p.mode), p.mode)


def univariate_law(p: ChainParams, t) -> DiscreteLaw:
    """Law of xi_t: p_{j,N}(A + t/2, B + t/2, C - t/2)."""
    t = as_mode(t, p.mode)
    time_domain(p).require(t)
    return wilson_law(LawParams6j(p.A + t / 2, p.B + t / 2, p.C - t / 2, p.N), validate=False)


def two_sided_law(p: ChainParams, s, t, u, k_state: int, m_state: int) -> DiscreteLaw:
    """Law of xi_t given xi_s = k and xi_u = m."""
    s, t, u = (as_mode(x, p.mode) for x in (s, t, u))
    time_domain(p).require(s, t, u)
    _ordered(s, t)
    _ordered(t, u)
    if not 0 <= k_state <= p.N or not 0 <= m_state <= p.N:
        raise EmptyConditioning(f"states ({k_state}, {m_state}) outside 0..{p.N}")
    if univariate_law(p, s).weight(k_state) * transition_matrix(p, s, u).entry(k_state, m_state) == 0:
        raise EmptyConditioning(f"P(xi_{s}={k_state}, xi_{u}={m_state}) = 0")
    return _bridge_law(p.A, s, t, u, k_state, m_state)


def reverse_law(A, B, t, u, n_state: int) -> DiscreteLaw:
    """Law of xi_t given xi_u = n for t < u: p_{j,n}(A + t/2, B + t/2, A + n + u - t/2).

    C and N do not enter, so the same law serves the main chain and every K-chain.
    """
    mode = same_mode(A, B, t, u) or Mode.EXACT
    A, B, t, u = (as_mode(x, mode) for x in (A, B, t, u))
    if not t < u:
        raise TimeOutOfDomain(f"expected t < u, got t={t}, u={u}")
    TimeDomain(-(A + B), None).require(t, u)
    return wilson_law(LawParams6j(A + t / 2, B + t / 2, A + n_state + u - t / 2, n_state), validate=False)


def _bridge_law(A, s, t, u, k: int, m: int) -> DiscreteLaw:
    law = LawParams6j(A + k + t / 2, -s + t / 2 - A - k, m + A - t / 2 + u, m - k)
    return DiscreteLaw(
        tuple(range(k, m + 1)),
        tuple(wilson_weight(j - k, law, validate=False) for j in range(k, m + 1)),
    )


@lru_cache(maxsize=4096)
def _k_chain_transition(K: int, A, B, s, t, mode: Mode) -> TransitionMatrix:
    TimeDomain(-(A + B), None).require(s, t)
    _ordered(s, t)
    zero = as_mode(0, mode)
    states = tuple(range(K + 1))
    rows = tuple(
        tuple(
            zero if j < m else pi_weight(j - m, K - m, 2 * A + 2 * m + t, t - s, allow_out_of_range=True)
            for j in states
        )
        for m in states
    )
    return _check_stochastic(TransitionMatrix.from_rows(s, t, states, rows, mode), mode)


def k_chain_transition(K: int, A, B, s, t) -> TransitionMatrix:
    """P(xi^(K)_t = j | xi^(K)_s = m) = pi_{j-m, K-m}(2A + 2m + t, t - s)."""
    if not isinstance(K, int) or K < 0:
        raise InvalidParams("K >= 0", f"K={K}")
    mode = same_mode(A, B, s, t) or Mode.EXACT
    A, B, s, t = (as_mode(x, mode) for x in (A, B, s, t))
    return _k_chain_transition(K, A, B, s, t, mode)


def k_chain_two_sided_law(K: int, A, B, s, t, u, k_state: int, m_state: int) -> DiscreteLaw:
    """Law of xi^(K)_t given xi^(K)_s = k and xi^(K)_u = m."""
    mode = same_mode(A, B, s, t, u) or Mode.EXACT
    A, B, s, t, u = (as_mode(x, mode) for x in (A, B, s, t, u))
    TimeDomain(-(A + B), None).require(s, t, u)
    _ordered(s, t)
    _ordered(t, u)
    if not 0 <= k_state <= m_state <= K:
        raise EmptyConditioning(f"states ({k_state}, {m_state}) not ordered inside 0..{K}")
    return _bridge_law(A, s, t, u, k_state, m_state)


def require_case1(p: ChainParams) -> None:
    if p.case is not Case.CASE1:
        raise WrongCase("the dual chain and the Theta randomization exist only in Case 1")


def dual_time_domain(p: ChainParams) -> TimeDomain:
    return TimeDomain(p.A + p.N - p.C, None)


@lru_cache(maxsize=4096)
def dual_transition(K: int, p: ChainParams, s, t) -> TransitionMatrix:
    """P(dual_t = j | dual_s = i) = pi_{j-K, i-K}(2A + 2K - t, 2A + i + K - s), K <= j <= i."""
    require_case1(p)
    if not 0 <= K <= p.N:
        raise InvalidParams("0 <= K <= N", f"K={K}, N={p.N}")
    s, t = as_mode(s, p.mode), as_mode(t, p.mode)
    dual_time_domain(p).require(s, t)
    _ordered(s, t)
    zero = as_mode(0, p.mode)
    states = tuple(range(K, p.N + 1))
    rows = tuple(
        tuple(
            zero
            if j > i
            else pi_weight(
                j - K, i - K, 2 * p.A + 2 * K - t, 2 * p.A + i + K - s, allow_out_of_range=True
            )
            for j in states
        )
        for i in states
    )
    return _check_stochastic(TransitionMatrix.from_rows(s, t, states, rows, p.mode), p.mode)


def dual_univariate_law(K: int, p: ChainParams, t) -> DiscreteLaw:
    """Law of the dual chain at t, started from N at time A+N-C."""
    require_case1(p)
    t = as_mode(t, p.mode)
    dual_time_domain(p).require(t)
    law = pi_law(p.N - K, 2 * p.A + 2 * K - t, p.A + p.C + K, allow_out_of_range=True)
    return DiscreteLaw(tuple(K + j for j in law.support), law.weights)


class MarkovChain(ABC):
    """Common interface of the three chain families."""

    mode: Mode
    direction: int = 1

    @property
    @abstractmethod
    def states(self) -> Tuple[int, ...]:
        ...

    @property
    @abstractmethod
    def domain(self) -> TimeDomain:
        ...

    @property
    def start_time(self) -> Scalar:
        return self.domain.lower

    @abstractmethod
    def univariate_law(self, t) -> DiscreteLaw:
        ...

    @abstractmethod
    def transition(self, s, t) -> TransitionMatrix:
        ...

    @abstractmethod
    def y_value(self, state: int, t) -> Scalar:
        ...

    def coerce(self, times: Iterable) -> Tuple[Scalar, ...]:
        return tuple(as_mode(t, self.mode) for t in times)

    def require_grid(self, times: Sequence) -> Tuple[Scalar, ...]:
        times = self.coerce(times)
        if not times:
            raise TimeOutOfDomain("empty time grid")
        self.domain.require(*times)
        for earlier, later in zip(times, times[1:]):
            _ordered(earlier, later)
        return times


class MainChain(MarkovChain):
    def __init__(self, params: ChainParams):
        self.params = params
        self.mode = params.mode

    @property
    def states(self) -> Tuple[int, ...]:
        return tuple(range(self.params.N + 1))

    @property
    def domain(self) -> TimeDomain:
        return time_domain(self.params)

    def univariate_law(self, t) -> DiscreteLaw:
        return univariate_law(self.params, t)

    def transition(self, s, t) -> TransitionMatrix:
        return transition_matrix(self.params, s, t)

    def y_value(self, state: int, t) -> Scalar:
        return y_value(state, self.params.A, as_mode(t, self.mode))

    def __repr__(self) -> str:
        return f"MainChain({self.params.label()}, {self.params.case.value})"


class KChain(MarkovChain):
    def __init__(self, K: int, A, B, mode: Mode = Mode.EXACT):
        if not isinstance(K, int) or K < 0:
            raise InvalidParams("K >= 0", f"K={K}")
        self.K = K
        self.mode = mode
        self.A = as_mode(A, mode)
        self.B = as_mode(B, mode)

    @classmethod
    def from_params(cls, K: int, p: ChainParams) -> "KChain":
        return cls(K, p.A, p.B, p.mode)

    @property
    def states(self) -> Tuple[int, ...]:
        return tuple(range(self.K + 1))

    @property
    def domain(self) -> TimeDomain:
        return TimeDomain(-(self.A + self.B), None)

    def univariate_law(self, t) -> DiscreteLaw:
        """pi_{j,K}(2A + t, t + A + B)."""
        t = as_mode(t, self.mode)
        self.domain.require(t)
        return pi_law(self.K, 2 * self.A + t, t + self.A + self.B, allow_out_of_range=True)

    def transition(self, s, t) -> TransitionMatrix:
        return k_chain_transition(self.K, self.A, self.B, as_mode(s, self.mode), as_mode(t, self.mode))

    def y_value(self, state: int, t) -> Scalar:
        return y_value(state, self.A, as_mode(t, self.mode))

    def __repr__(self) -> str:
        return f"KChain(K={self.K}, A={self.A}, B={self.B})"


class DualChain(MarkovChain):
    direction = -1

    def __init__(self, K: int, params: ChainParams):
        require_case1(params)
        if not 0 <= K <= params.N:
            raise InvalidParams("0 <= K <= N", f"K={K}, N={params.N}")
        self.K = K
        self.params = params
        self.mode = params.mode

    @property
    def states(self) -> Tuple[int, ...]:
        return tuple(range(self.K, self.params.N + 1))

    @property
    def domain(self) -> TimeDomain:
        return dual_time_domain(self.params)

    def univariate_law(self, t) -> DiscreteLaw:
        return dual_univariate_law(self.K, self.params, t)

    def transition(self, s, t) -> TransitionMatrix:
        return dual_transition(self.K, self.params, s, t)

    def y_value(self, state: int, t) -> Scalar:
        return y_value(state, self.params.A, as_mode(t, self.mode), dual=True)

    def __repr__(self) -> str:
        return f"DualChain(K={self.K}, {self.params.label()})"


def y_value(state: int, A, t, *, dual: bool = False) -> Scalar:
    """(A + t + state)(A + state); the dual line is (t - A - state)(A + state)."""
    if dual:
        return (t - A - state) * (A + state)
    return (A + t + state) * (A + state)


def line_intersections(p: ChainParams) -> List[Tuple[int, int, Scalar]]:
    """Times where the lines of states j < k meet: -(2A + j + k)."""
    return [
        (j, k, -(2 * p.A + j + k)) for j in range(p.N + 1) for k in range(j + 1, p.N + 1)
    ]


@dataclass(frozen=True)
class JointLaw:
    """Exact law of the states at ``times``: atoms map state tuples to mass."""

    times: Tuple[Scalar, ...]
    atoms: Dict[Tuple[int, ...], Scalar] = field(compare=False)

    def total_mass(self) -> Scalar:
        return sum(self.atoms.values())

    def marginal(self, indices: Sequence[int]) -> "JointLaw":
        masses: Dict[Tuple[int, ...], Scalar] = defaultdict(int)
        for key, mass in self.atoms.items():
            masses[tuple(key[i] for i in indices)] += mass
        return JointLaw(tuple(self.times[i] for i in indices), dict(masses))

    def univariate(self, index: int) -> DiscreteLaw:
        return DiscreteLaw.from_dict({key[0]: mass for key, mass in self.marginal([index]).atoms.items()})

    def expectation(self, fn: Callable[[Tuple[int, ...]], Scalar]) -> Scalar:
        return sum(mass * fn(key) for key, mass in self.atoms.items())

    def pushforward(self, fns: Sequence[Callable[[int], Scalar]]) -> Dict[tuple, Scalar]:
        """Law of (fns[0](x_0), fns[1](x_1), ...)."""
        masses: Dict[tuple, Scalar] = defaultdict(int)
        for key, mass in self.atoms.items():
            masses[tuple(fn(state) for fn, state in zip(fns, key))] += mass
        return dict(masses)

    def conditional_moments(
        self, target: int, given: Sequence[int], value: Callable[[int], Scalar]
    ) -> Dict[Tuple[int, ...], Tuple[Scalar, Scalar, Scalar]]:
        """For each conditioning tuple with positive mass: (mass, mean, variance) of value(x_target)."""
        sums: Dict[Tuple[int, ...], List[Scalar]] = {}
        for key, mass in self.atoms.items():
            if mass == 0:
                continue
            x = value(key[target])
            acc = sums.setdefault(tuple(key[i] for i in given), [0, 0, 0])
            acc[0] += mass
            acc[1] += mass * x
            acc[2] += mass * x * x
        result = {}
        for condition, (mass, first, second) in sums.items():
            mean = first / mass
            result[condition] = (mass, mean, second / mass - mean * mean)
        return result

    def total_variation(self, other: "JointLaw") -> Scalar:
        keys = set(self.atoms) | set(other.atoms)
        return sum(abs(self.atoms.get(key, 0) - other.atoms.get(key, 0)) for key in keys) / 2


def monotone_tuple_count(n_states: int, length: int) -> int:
    return comb(n_states - 1 + length, length)


def joint_law_on_grid(
    chain: MarkovChain, times: Sequence, max_atoms: int = DEFAULT_MAX_ATOMS
) -> JointLaw:
    """Exact joint law of the chain at ``times`` by products of transition entries."""
    times = chain.require_grid(times)
    bound = monotone_tuple_count(len(chain.states), len(times))
    if bound > max_atoms:
        raise GridTooLarge(f"{bound} monotone tuples exceed the cap {max_atoms}")

    atoms: Dict[Tuple[int, ...], Scalar] = {
        (state,): mass for state, mass in chain.univariate_law(times[0]) if mass != 0
    }
    for previous, current in zip(times, times[1:]):
        step = chain.transition(previous, current)
        extended: Dict[Tuple[int, ...], Scalar] = defaultdict(int)
        for key, mass in atoms.items():
            for target, probability in step.row(key[-1]).items():
                extended[key + (target,)] += mass * probability
        atoms = dict(extended)
    logger.debug(f"enumerated {len(atoms)} atoms for {chain!r} on {len(times)} times")
    return JointLaw(times, atoms)


@dataclass(frozen=True)
class Trajectory:
    times: Tuple[Scalar, ...]
    states: Tuple[int, ...]
    seed: int
    index: int = 0

    def y_values(self, chain: MarkovChain) -> Tuple[Scalar, ...]:
        return tuple(chain.y_value(state, t) for state, t in zip(self.states, self.times))


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for path ``index``; independent of how many paths are drawn."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def cdf_table(row: Dict[int, Scalar]) -> Tuple[np.ndarray, np.ndarray]:
    targets = np.array(sorted(row), dtype=np.int64)
    cdf = np.cumsum([float(row[state]) for state in targets])
    return targets, cdf


def draw_state(rng: np.random.Generator, targets: np.ndarray, cdf: np.ndarray) -> int:
    position = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return int(targets[min(position, len(targets) - 1)])


class GridSampler:
    """Inverse-CDF sampler with the step distributions of one chain precomputed."""

    def __init__(self, chain: MarkovChain, times: Sequence):
        self.chain = chain
        self.times = chain.require_grid(times)
        self.initial = cdf_table(chain.univariate_law(self.times[0]).as_dict())
        self.steps = []
        for previous, current in zip(self.times, self.times[1:]):
            step = chain.transition(previous, current)
            self.steps.append({state: cdf_table(step.row(state)) for state in step.states})

    def draw(self, rng: np.random.Generator) -> Tuple[int, ...]:
        states = [draw_state(rng, *self.initial)]
        for step in self.steps:
            states.append(draw_state(rng, *step[states[-1]]))
        return tuple(states)


def sample_trajectory(chain: MarkovChain, times: Sequence, seed: int, index: int = 0) -> Trajectory:
    sampler = GridSampler(chain, times)
    return Trajectory(sampler.times, sampler.draw(path_rng(seed, index)), seed, index)


def sample_paths(chain: MarkovChain, times: Sequence, seed: int, n_paths: int) -> np.ndarray:
    """States of ``n_paths`` trajectories, shape (n_paths, len(times)); row i uses substream i."""
    sampler = GridSampler(chain, times)
    paths = np.empty((n_paths, len(sampler.times)), dtype=np.int64)
    for index in range(n_paths):
        paths[index] = sampler.draw(path_rng(seed, index))
    logger.info(f"sampled {n_paths} paths of {chain!r}")
    return paths
