"""
Theta-randomized representation of the Case 1 chain and the stitched
process on (0, inf).

Given Theta = k, the left piece is the K-chain with K = k and the right piece
is the dual chain on {k..N}; both are enumerated exactly and glued at t = 1
by W_1 = (A+C)N + Theta (N-B-C).
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from harness_lab.models.errors import EmptyConditioning, GridTooLarge, InvalidState, TimeOutOfDomain
from harness_lab.services.harness import (
    AffineMap,
    ScaledParams,
    Standardization,
    cov_factor,
    harness_residuals,
    k_chain_y_moments,
    main_standardization,
    y_mean_coefficients,
)
from harness_lab.services.markov import (
    DEFAULT_MAX_ATOMS,
    ChainParams,
    DualChain,
    GridSampler,
    JointLaw,
    KChain,
    TimeDomain,
    cdf_table,
    draw_state,
    dual_time_domain,
    joint_law_on_grid,
    path_rng,
    require_case1,
    y_value,
)
from harness_lab.services.scalar import Scalar, as_mode, rational_sqrt
from harness_lab.services.wilson import DiscreteLaw, big_pi_law, u_moments

logger = logging.getLogger(__name__)


def theta_law(p: ChainParams) -> DiscreteLaw:
    """Law of Theta = lim xi_t: Pi_k(A+C, A-B+1; N)."""
    require_case1(p)
    return big_pi_law(p.A + p.C, p.A - p.B + 1, p.N)


def theta_moments(p: ChainParams) -> Tuple[Scalar, Scalar]:
    require_case1(p)
    if p.N == 0:
        zero = as_mode(0, p.mode)
        return zero, zero
    return (p.A + p.C) * p.N / (p.B + p.C - p.N), cov_factor(p)


def _k_times(p: ChainParams, times: Sequence) -> Tuple[Scalar, ...]:
    times = tuple(as_mode(t, p.mode) for t in times)
    TimeDomain(-(p.A + p.B), None).require(*times)
    return times


def mixture_joint_law(p: ChainParams, times: Sequence, max_atoms: int = DEFAULT_MAX_ATOMS) -> JointLaw:
    """Sum over k of P(Theta = k) times the joint law of the K-chain with K = k."""
    times = _k_times(p, times)
    atoms: Dict[Tuple[int, ...], Scalar] = defaultdict(int)
    for k, weight in theta_law(p):
        if weight == 0:
            continue
        for key, mass in joint_law_on_grid(KChain(k, p.A, p.B, p.mode), times, max_atoms).atoms.items():
            atoms[key] += weight * mass
    return JointLaw(times, dict(atoms))


def theta_conditional_law(p: ChainParams, s, u, m_state: int, n_state: int) -> DiscreteLaw:
    """Law of Theta given zeta_s = m (left chain time s) and zeta'_u = n (dual time u)."""
    require_case1(p)
    s, u = as_mode(s, p.mode), as_mode(u, p.mode)
    TimeDomain(-(p.A + p.B), None).require(s)
    dual_time_domain(p).require(u)
    if not 0 <= m_state <= n_state <= p.N:
        raise EmptyConditioning(f"left state {m_state} exceeds right state {n_state}")
    law = big_pi_law(
        2 * p.A + m_state + n_state - u, 2 * p.A + 2 * m_state + s + 1, n_state - m_state, validate=False
    )
    return DiscreteLaw(tuple(m_state + k for k in law.support), law.weights)


def theta_endpoint_joint(p: ChainParams, s, u) -> Dict[Tuple[int, int, int], Scalar]:
    """Masses of (Theta, zeta_s, zeta'_u) from the Theta-conditional product."""
    require_case1(p)
    s, u = as_mode(s, p.mode), as_mode(u, p.mode)
    atoms = {}
    for k, weight in theta_law(p):
        left = KChain(k, p.A, p.B, p.mode).univariate_law(s)
        right = DualChain(k, p).univariate_law(u)
        for m_state, left_mass in left:
            for n_state, right_mass in right:
                mass = weight * left_mass * right_mass
                if mass != 0:
                    atoms[(k, m_state, n_state)] = mass
    return atoms


def _state_on_line(A, t, y, *, dual: bool) -> int:
    """Solve (A+t+k)(A+k) = y, or (t-A-k)(A+k) = y, for an integer k >= 0."""
    discriminant = t * t - 4 * y if dual else t * t + 4 * y
    if isinstance(discriminant, float):
        if discriminant < 0:
            raise InvalidState(f"Y={y} is on no line at t={t}")
        root = math.sqrt(discriminant)
    else:
        root = rational_sqrt(discriminant)
        if root is None:
            raise InvalidState(f"Y={y} is on no line at t={t}")
    sign = 1 if dual else -1
    for x in ((sign * t + root) / 2, (sign * t - root) / 2):
        k = x - A
        nearest = round(k)
        if nearest >= 0 and abs(k - nearest) <= 1e-9 * max(1, abs(k)):
            return int(nearest)
    raise InvalidState(f"Y={y} is on no line at t={t}")


def theta_conditional_moments(A, s, u, y_left, y_right) -> Tuple[Scalar, Scalar]:
    """E and Var of Theta given the left Y at chain time s and the dual Y at dual time u."""
    mean = (y_left + y_right) / (u + s) - A
    denominator = (s + u - 1) * (s + u) ** 2
    if denominator != 0:
        numerator = (
            s * s * y_right
            - u * u * y_left
            + s * u * (y_right - y_left)
            + (y_left + y_right) ** 2
        )
        return mean, numerator / denominator
    # s + u = 1 only leaves room for n - m <= 1
    m_state = _state_on_line(A, s, y_left, dual=False)
    n_state = _state_on_line(A, u, y_right, dual=True)
    if m_state > n_state:
        raise EmptyConditioning(f"left state {m_state} exceeds right state {n_state}")
    _, variance = u_moments(2 * A + m_state + n_state - u, 2 * A + 2 * m_state + s + 1, n_state - m_state)
    return mean, variance


@dataclass(frozen=True)
class StitchConstants:
    """Maps of the stitched construction: W_t = (1-t) X at phi(t) on (0,1), W_1 from Theta,
    W_t = (t-1) X~ at phi'(t) = -phi(t) on (1, inf)."""

    params: ChainParams
    alpha: Scalar
    beta: Scalar
    v: object
    v_over_M: Scalar
    ell: AffineMap
    m: AffineMap
    ell_prime: AffineMap
    m_prime: AffineMap
    standardization: Standardization = field(repr=False)

    @property
    def scale2(self) -> Scalar:
        return self.standardization.scale2

    def phi(self, t) -> Scalar:
        return self.ell.numerator(t) / self.m.numerator(t)

    def phi_prime(self, t) -> Scalar:
        return self.ell_prime.numerator(t) / self.m_prime.numerator(t)

    def reductions(self, s, u) -> Tuple[Scalar, Scalar]:
        """Residuals of ell(s) + (A+B) m(s) = s/M and ell'(u) - (A+N-C) m'(u) = 1/M, times v."""
        p = self.params
        left = self.ell.numerator(s) + (p.A + p.B) * self.m.numerator(s) - s * self.v_over_M
        right = self.ell_prime.numerator(u) - (p.A + p.N - p.C) * self.m_prime.numerator(u) - self.v_over_M
        return left, right


def stitch_constants(p: ChainParams) -> StitchConstants:
    require_case1(p)
    st = main_standardization(p)
    alpha, beta = y_mean_coefficients(p)
    slope, intercept = p.A - p.C + p.N, -(p.A + p.B)
    one = as_mode(1, p.mode)
    return StitchConstants(
        params=p,
        alpha=alpha,
        beta=beta,
        v=st.scale,
        v_over_M=p.N - p.B - p.C,
        ell=st.ell,
        m=st.m,
        ell_prime=AffineMap(slope, intercept, st.scale),
        m_prime=AffineMap(one, -one, st.scale),
        standardization=st,
    )


def stitched_w(sc: StitchConstants, t, *, y=None, theta: Optional[int] = None) -> Scalar:
    """W_t = v Z_t; ``y`` is the left Y for t < 1 and the dual Y for t > 1."""
    p = sc.params
    if not t > 0:
        raise TimeOutOfDomain(f"stitched time must be positive, got {t}")
    if t == 1:
        return (p.A + p.C) * p.N + theta * (p.N - p.B - p.C)
    if t < 1:
        chain_time = sc.phi(t)
        return (1 - t) * (y - sc.alpha - sc.beta * chain_time)
    chain_time = sc.phi_prime(t)
    return (t - 1) * (y - (sc.beta * chain_time - sc.alpha))


def stitched_value(sc: StitchConstants, t, *, y=None, theta: Optional[int] = None):
    """Z_t of the stitched process."""
    return stitched_w(sc, t, y=y, theta=theta) / sc.v


@dataclass(frozen=True)
class StitchedJointLaw:
    """Atoms keyed by (theta, left states, right states); left times < 1 < right times."""

    times: Tuple[Scalar, ...]
    atoms: Dict[Tuple[int, Tuple[int, ...], Tuple[int, ...]], Scalar] = field(compare=False)
    constants: StitchConstants = field(repr=False, compare=False)

    def total_mass(self) -> Scalar:
        return sum(self.atoms.values())

    def _values(self, key) -> Tuple[Scalar, ...]:
        sc = self.constants
        p = sc.params
        theta, left, right = key
        left_iter, right_iter = iter(left), iter(right)
        values = []
        for t in self.times:
            if t < 1:
                y = y_value(next(left_iter), p.A, sc.phi(t))
                values.append(stitched_w(sc, t, y=y))
            elif t == 1:
                values.append(stitched_w(sc, t, theta=theta))
            else:
                y = y_value(next(right_iter), p.A, sc.phi_prime(t), dual=True)
                values.append(stitched_w(sc, t, y=y))
        return tuple(values)

    def grid_law(self) -> JointLaw:
        """Law of (W_t) over ``times``, merged over Theta and states."""
        masses: Dict[tuple, Scalar] = defaultdict(int)
        for key, mass in self.atoms.items():
            masses[self._values(key)] += mass
        return JointLaw(self.times, dict(masses))


def _stitched_times(p: ChainParams, times: Sequence) -> Tuple[Scalar, ...]:
    times = tuple(as_mode(t, p.mode) for t in times)
    if not times or any(not t > 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise TimeOutOfDomain("stitched grid must be positive and strictly increasing")
    return times


def _stitched_size(p: ChainParams, n_left: int, n_right: int) -> int:
    return sum(comb(k + n_left, n_left) * comb(p.N - k + n_right, n_right) for k in range(p.N + 1))


def stitched_joint_law(
    p: ChainParams, times: Sequence, max_atoms: int = DEFAULT_MAX_ATOMS
) -> StitchedJointLaw:
    sc = stitch_constants(p)
    times = _stitched_times(p, times)
    left_times = [t for t in times if t < 1]
    right_times = [t for t in times if t > 1]
    size = _stitched_size(p, len(left_times), len(right_times))
    if size > max_atoms:
        raise GridTooLarge(f"{size} stitched atoms exceed the cap {max_atoms}")

    left_chain_times = [sc.phi(t) for t in left_times]
    # phi' decreases on (1, inf); the dual chain is enumerated in increasing chain time
    right_chain_times = [sc.phi_prime(t) for t in reversed(right_times)]

    atoms = {}
    for k, weight in theta_law(p):
        if weight == 0:
            continue
        left_law = (
            joint_law_on_grid(KChain(k, p.A, p.B, p.mode), left_chain_times, max_atoms).atoms
            if left_times
            else {(): 1}
        )
        right_law = (
            joint_law_on_grid(DualChain(k, p), right_chain_times, max_atoms).atoms
            if right_times
            else {(): 1}
        )
        for left, left_mass in left_law.items():
            for right, right_mass in right_law.items():
                mass = weight * left_mass * right_mass
                if mass != 0:
                    atoms[(k, left, tuple(reversed(right)))] = mass
    logger.debug(f"stitched law of {p.label()} on {len(times)} times: {len(atoms)} atoms")
    return StitchedJointLaw(times, atoms, sc)


def dual_y_moments(p: ChainParams, s, t, K: Optional[int] = None) -> Tuple[Scalar, Scalar]:
    """(E Y~_t, Cov(Y~_s, Y~_t)) for s <= t in the dual domain; Theta-randomized when K is None."""
    require_case1(p)
    s, t = as_mode(s, p.mode), as_mode(t, p.mode)
    dual_time_domain(p).require(s, t)
    s, t = min(s, t), max(s, t)
    A, B, C, N = p.A, p.B, p.C, p.N
    if K is None:
        alpha, beta = y_mean_coefficients(p)
        return t * beta - alpha, cov_factor(p) * (A + B - t) * (A - C + N - s)
    mean = (A + K) * t - (A + K) * (A + N) - C * (N - K)
    return mean, (K + A + C) * (N - K) * (N + A - C - s)


def mean_square_gap(p: ChainParams, s) -> Scalar:
    """E|Z_s - Z_1|^2 for 0 < s < 1; equals 1 - s."""
    law = stitched_joint_law(p, [s, 1]).grid_law()
    sc = stitch_constants(p)
    return law.expectation(lambda key: (key[0] - key[1]) ** 2) / sc.scale2


@dataclass(frozen=True)
class ExtensionOutcome:
    left_ok: bool
    right_ok: bool
    at_one_ok: bool
    full_ok: bool

    @property
    def consistent(self) -> bool:
        """The sub-interval checks together with t = 1 imply the full-grid check."""
        return not (self.left_ok and self.right_ok and self.at_one_ok) or self.full_ok


def _clean(residuals, tolerance: float) -> bool:
    if tolerance == 0:
        return all(r.residual == 0 for r in residuals)
    return all(abs(float(r.residual)) <= tolerance for r in residuals)


def extension_check(
    p: ChainParams, times: Sequence, sp: ScaledParams, tolerance: float = 0.0
) -> ExtensionOutcome:
    """Harness checks on (0,1), on (1,inf), at t = 1, and on the whole grid."""
    law = stitched_joint_law(p, times).grid_law()
    left = [i for i, t in enumerate(law.times) if t < 1]
    right = [i for i, t in enumerate(law.times) if t > 1]
    left_ok = _clean(harness_residuals(law.marginal(left), sp), tolerance) if left else True
    right_ok = _clean(harness_residuals(law.marginal(right), sp), tolerance) if right else True
    full = harness_residuals(law, sp)
    at_one = [
        r for r in full
        if r.family == "two-sided-variance" and r.times[1] == 1
    ]
    return ExtensionOutcome(left_ok, right_ok, _clean(at_one, tolerance), _clean(full, tolerance))


def limit_growth(K: int, A, B, t: float) -> Tuple[float, float]:
    """(E Y^(K)_t / t - (A+K), Var Y^(K)_t / t^2) at a large float time t."""
    A, B, t = float(A), float(B), float(t)
    mean, variance = k_chain_y_moments(K, A, B, t)
    return mean / t - (A + K), variance / (t * t)


@dataclass(frozen=True)
class StitchedTrajectory:
    """One sampled stitched path; ``states`` holds the left state, Theta at t = 1, then the dual state."""

    index: int
    theta: int
    times: Tuple[Scalar, ...]
    states: Tuple[int, ...]
    y_values: Tuple[Optional[Scalar], ...]
    w_values: Tuple[Scalar, ...]


class StitchedSampler:
    """Draws Theta, then the left K-chain and the right dual chain given Theta."""

    def __init__(self, p: ChainParams, times: Sequence):
        self.params = p
        self.constants = stitch_constants(p)
        self.times = _stitched_times(p, times)
        self.left_times = [t for t in self.times if t < 1]
        self.right_times = [t for t in self.times if t > 1]
        self.theta = cdf_table(theta_law(p).as_dict())
        self._left: Dict[int, GridSampler] = {}
        self._right: Dict[int, GridSampler] = {}
        self._points: Dict[Tuple[Scalar, int], Tuple[Optional[Scalar], Scalar]] = {}

    def _left_sampler(self, k: int) -> GridSampler:
        if k not in self._left:
            p, sc = self.params, self.constants
            self._left[k] = GridSampler(KChain(k, p.A, p.B, p.mode), [sc.phi(t) for t in self.left_times])
        return self._left[k]

    def _right_sampler(self, k: int) -> GridSampler:
        if k not in self._right:
            sc = self.constants
            chain_times = [sc.phi_prime(t) for t in reversed(self.right_times)]
            self._right[k] = GridSampler(DualChain(k, self.params), chain_times)
        return self._right[k]

    def _point(self, t, state: int) -> Tuple[Optional[Scalar], Scalar]:
        """(Y, W) at stitched time t; Y is undefined at t = 1."""
        key = (t, state)
        if key not in self._points:
            sc, A = self.constants, self.params.A
            if t < 1:
                y = y_value(state, A, sc.phi(t))
            elif t > 1:
                y = y_value(state, A, sc.phi_prime(t), dual=True)
            else:
                y = None
            self._points[key] = (y, stitched_w(sc, t, y=y, theta=state))
        return self._points[key]

    def draw(self, rng: np.random.Generator, index: int = 0) -> StitchedTrajectory:
        k = draw_state(rng, *self.theta)
        left = iter(self._left_sampler(k).draw(rng) if self.left_times else ())
        right = iter(reversed(self._right_sampler(k).draw(rng)) if self.right_times else ())
        states = []
        for t in self.times:
            if t < 1:
                states.append(next(left))
            elif t > 1:
                states.append(next(right))
            else:
                states.append(k)
        points = [self._point(t, state) for t, state in zip(self.times, states)]
        return StitchedTrajectory(
            index,
            k,
            self.times,
            tuple(states),
            tuple(y for y, _ in points),
            tuple(w for _, w in points),
        )


def sample_stitched_paths(p: ChainParams, times: Sequence, seed: int, n_paths: int) -> List[StitchedTrajectory]:
    """Stitched trajectories on a positive grid; path i uses RNG substream i."""
    sampler = StitchedSampler(p, times)
    paths = [sampler.draw(path_rng(seed, index), index) for index in range(n_paths)]
    logger.info(f"sampled {n_paths} stitched paths of {p.label()}")
    return paths


def stitched_z_matrix(paths: Sequence[StitchedTrajectory], sc: StitchConstants) -> np.ndarray:
    """Float Z-values, shape (len(paths), len(times))."""
    scale = float(sc.v)
    return np.array([[float(w) for w in path.w_values] for path in paths], dtype=np.float64) / scale
