"""
Quadratic processes Y_t built on the chains, their exact moments, and the
Moebius standardization that turns them into quadratic harnesses.

Identity checks run in W = lambda * Z coordinates: W is rational for rational
times, and the harness parameters rescaled by lambda are rational too, so no
square root is needed until a value is rendered.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from harness_lab.models.errors import (
    DegenerateChain,
    EmptyConditioning,
    InvalidDescriptor,
    InvalidState,
    TimeOutOfDomain,
    WrongCase,
)
from harness_lab.models.model import Branch, Case, Mode
from harness_lab.services.markov import (
    DEFAULT_MAX_ATOMS,
    ChainParams,
    JointLaw,
    MarkovChain,
    TimeDomain,
    dual_time_domain,
    joint_law_on_grid,
    time_domain,
    y_value,
)
from harness_lab.services.scalar import (
    Scalar,
    as_mode,
    exact,
    exact_equal,
    is_close,
    is_zero,
    same_mode,
    scalar_sqrt,
)
from harness_lab.services.wilson import LawParams6j, y_moments_6j

logger = logging.getLogger(__name__)

AXIOM_FAMILIES = (
    "mean-zero",
    "covariance-min",
    "forward-mean",
    "forward-variance",
    "backward-mean",
    "backward-variance",
    "two-sided-mean",
    "two-sided-variance",
)


def _sign(case: Case) -> int:
    return 1 if case is Case.CASE1 else -1


def state_from_y(y, A, t, states: Iterable[int], *, dual: bool = False) -> int:
    """The state whose line passes through ``y`` at time ``t``."""
    for state in states:
        if is_close(y_value(state, A, t, dual=dual), y):
            return state
    raise InvalidState(f"Y={y} is on no line at t={t}")


# -- main chain moments --------------------------------------------------------


def y_mean_coefficients(p: ChainParams) -> Tuple[Scalar, Scalar]:
    """(alpha, beta) with E(Y_t) = alpha + beta t."""
    A, B, C, N = p.A, p.B, p.C, p.N
    if N == 0:
        return A * A, A
    alpha = (A * (B + C) * (A + N) + N * B * C) / (B + C - N)
    beta = (A * (B + C) + N * C) / (B + C - N)
    return alpha, beta


def cov_factor(p: ChainParams) -> Scalar:
    """F with Cov(Y_s, Y_t) = F (A+B+s)(A-C+N+t) for s <= t."""
    A, B, C, N = p.A, p.B, p.C, p.N
    if N == 0:
        return as_mode(0, p.mode)
    if N == 1:
        return -(A + C) * (A - B + 1) / (B + C - 1) ** 2
    return -N * (A + C) * (B + C) * (A - B + N) / ((B + C - N) ** 2 * (B + C - N + 1))


def y_moments(p: ChainParams, t) -> Tuple[Scalar, Scalar]:
    t = as_mode(t, p.mode)
    time_domain(p).require(t)
    alpha, beta = y_mean_coefficients(p)
    return alpha + beta * t, cov_factor(p) * (p.A + p.B + t) * (p.A - p.C + p.N + t)


def y_cov(p: ChainParams, s, t) -> Scalar:
    s, t = as_mode(s, p.mode), as_mode(t, p.mode)
    time_domain(p).require(s, t)
    s, t = min(s, t), max(s, t)
    return cov_factor(p) * (p.A + p.B + s) * (p.A - p.C + p.N + t)


def y_conditional_moments(p: ChainParams, s, t, y_s) -> Tuple[Scalar, Scalar]:
    """E(Y_t | Y_s) and Var(Y_t | Y_s) for s < t."""
    s, t = as_mode(s, p.mode), as_mode(t, p.mode)
    time_domain(p).require(s, t)
    if not s < t:
        raise TimeOutOfDomain(f"expected s < t, got s={s}, t={t}")
    k = state_from_y(y_s, p.A, s, range(p.N + 1))
    A, C, N = p.A, p.C, p.N
    shift = A - C + N
    mean = y_s * (shift + t) / (shift + s) - C * (A + N) * (t - s) / (shift + s)
    denominator = (shift + s) ** 2 * (shift + s - 1)
    if denominator != 0:
        variance = (
            (shift + t) * (t - s) * (y_s + C * (s - C)) * (y_s - (A + N) * (s + A + N)) / denominator
        )
        return mean, variance
    # Y_t is a shifted k'(2a'+k') under the row law of state k
    a_row = A + t / 2 + k
    row = LawParams6j(a_row, -A - s + t / 2 - k, C - t / 2, N - k)
    row_mean, variance = y_moments_6j(row)
    return a_row * a_row - t * t / 4 + row_mean, variance


def y_two_sided_moments(s, t, u, y_s, y_u, *, dual: bool = False) -> Tuple[Scalar, Scalar]:
    """E and Var of Y_t given Y_s and Y_u; ``dual`` flips the sign of the tilde term."""
    if not s < t < u:
        raise TimeOutOfDomain(f"expected s < t < u, got {s}, {t}, {u}")
    mean = ((u - t) * y_s + (t - s) * y_u) / (u - s)
    linear = (u * y_s - s * y_u) / (u - s)
    quadratic = (y_u - y_s) ** 2 / (u - s) ** 2
    spread = quadratic + linear if dual else quadratic - linear
    return mean, (u - t) * (t - s) / (u - s + 1) * spread


def main_two_sided_moments(p: ChainParams, s, t, u, y_s, y_u) -> Tuple[Scalar, Scalar]:
    s, t, u = (as_mode(x, p.mode) for x in (s, t, u))
    time_domain(p).require(s, t, u)
    states = range(p.N + 1)
    k = state_from_y(y_s, p.A, s, states)
    m = state_from_y(y_u, p.A, u, states)
    if k > m:
        raise EmptyConditioning(f"state {k} at s={s} cannot reach {m} at u={u}")
    return y_two_sided_moments(s, t, u, y_s, y_u)


def _reverse_moments(A, B, t, u, y_u) -> Tuple[Scalar, Scalar]:
    total = A + B + u
    mean = y_u * (A + B + t) / total - A * B * (u - t) / total
    variance = (
        (A + B + t) * (u - t) * (y_u - A * (A + u)) * (y_u - B * (u + B)) / (total**2 * (total + 1))
    )
    return mean, variance


def reverse_moments(p: ChainParams, t, u, y_u) -> Tuple[Scalar, Scalar]:
    """E(Y_t | Y_u) and Var(Y_t | Y_u) for t < u; C and N do not enter."""
    t, u = as_mode(t, p.mode), as_mode(u, p.mode)
    time_domain(p).require(t, u)
    if not t < u:
        raise TimeOutOfDomain(f"expected t < u, got t={t}, u={u}")
    state_from_y(y_u, p.A, u, range(p.N + 1))
    return _reverse_moments(p.A, p.B, t, u, y_u)


# -- K-chain moments -----------------------------------------------------------


def _k_domain(A, B, *times) -> None:
    TimeDomain(-(A + B), None).require(*times)


def k_chain_y_moments(K: int, A, B, t) -> Tuple[Scalar, Scalar]:
    _k_domain(A, B, t)
    return A * A + (A + K) * t + K * (A + B), K * (K + A - B) * (t + A + B)


def k_chain_y_cov(K: int, A, B, s, t) -> Scalar:
    _k_domain(A, B, s, t)
    return K * (K + A - B) * (min(s, t) + A + B)


def k_chain_conditional_moments(K: int, A, B, s, t, y_s) -> Tuple[Scalar, Scalar]:
    _k_domain(A, B, s, t)
    if not s < t:
        raise TimeOutOfDomain(f"expected s < t, got s={s}, t={t}")
    state_from_y(y_s, A, s, range(K + 1))
    return y_s + (A + K) * (t - s), ((A + K) * (s + A + K) - y_s) * (t - s)


def k_chain_reverse_moments(K: int, A, B, t, u, y_u) -> Tuple[Scalar, Scalar]:
    _k_domain(A, B, t, u)
    if not t < u:
        raise TimeOutOfDomain(f"expected t < u, got t={t}, u={u}")
    state_from_y(y_u, A, u, range(K + 1))
    return _reverse_moments(A, B, t, u, y_u)


# -- standardization -----------------------------------------------------------


@dataclass(frozen=True)
class MomentDescriptor:
    """E(Y_t) = alpha + beta t, Cov(Y_s, Y_t) = M2 (psi+s)(delta+epsilon t) for s < t,
    two-sided variance proportional to eta0*tilde + theta0*increment + increment^2."""

    alpha: Scalar
    beta: Scalar
    M2: Scalar
    psi: Scalar
    delta: Scalar
    epsilon: Scalar
    eta0: Scalar
    theta0: Scalar

    @property
    def chi(self) -> Scalar:
        return self.alpha * self.eta0 + self.beta * self.theta0 + self.beta * self.beta

    @property
    def gap(self) -> Scalar:
        return self.delta - self.epsilon * self.psi

    def validate(self) -> None:
        if not self.M2 > 0:
            raise InvalidDescriptor(f"M^2 > 0 violated: M^2={self.M2}")
        if not self.gap > 0:
            raise InvalidDescriptor(f"delta - epsilon*psi > 0 violated: {self.gap}")
        if not self.chi > 0:
            raise InvalidDescriptor(f"chi > 0 violated: chi={self.chi}")

    def mean(self, t) -> Scalar:
        return self.alpha + self.beta * t

    def cov(self, s, t) -> Scalar:
        s, t = min(s, t), max(s, t)
        return self.M2 * (self.psi + s) * (self.delta + self.epsilon * t)


@dataclass(frozen=True)
class AffineMap:
    """t -> (slope * t + intercept) / scale."""

    slope: Scalar
    intercept: Scalar
    scale: object

    def numerator(self, t) -> Scalar:
        return self.slope * t + self.intercept

    def __call__(self, t):
        return self.numerator(t) / self.scale


@dataclass(frozen=True)
class HarnessParams:
    eta: object
    theta: object
    sigma: Scalar
    tau: Scalar
    gamma: Scalar
    domain: TimeDomain

    def swapped(self, domain: TimeDomain) -> "HarnessParams":
        """Parameters of t Z_{1/t}."""
        return HarnessParams(self.theta, self.eta, self.tau, self.sigma, self.gamma, domain)

    def floats(self) -> Dict[str, float]:
        return {
            name: float(getattr(self, name)) for name in ("eta", "theta", "sigma", "tau", "gamma")
        }

    def gamma_residual(self, sign: int):
        """gamma - 1 - sign * 2 sqrt(sigma tau)."""
        residual = self.gamma - 1 - sign * 2 * scalar_sqrt(self.sigma * self.tau)
        if isinstance(residual, sympy.Basic):
            return exact(sympy.simplify(residual))
        return residual

    def gamma_identity(self) -> str:
        for sign, label in ((1, "gamma = 1 + 2 sqrt(sigma tau)"), (-1, "gamma = 1 - 2 sqrt(sigma tau)")):
            residual = self.gamma_residual(sign)
            if is_zero(residual):
                return f"{label} (exact)"
            if same_mode(self.sigma, self.tau, self.gamma) is Mode.FLOAT and abs(float(residual)) < 1e-9:
                return f"{label} (float)"
        return "none"

    def matches(self, other: "HarnessParams", rel_tol: float = 1e-10) -> bool:
        pairs = [(getattr(self, name), getattr(other, name)) for name in ("eta", "theta", "sigma", "tau", "gamma")]
        if any(isinstance(x, float) or isinstance(y, float) for x, y in pairs):
            return all(abs(float(x) - float(y)) <= rel_tol * max(1.0, abs(float(y))) for x, y in pairs)
        return all(exact_equal(x, y) for x, y in pairs)


@dataclass(frozen=True)
class ScaledParams:
    """Harness parameters in W = lambda Z coordinates; all rational for rational inputs."""

    eta_w: Scalar
    theta_w: Scalar
    sigma_w: Scalar
    tau_w: Scalar
    one_minus_gamma_w: Scalar
    sigma: Scalar
    tau: Scalar
    gamma: Scalar
    scale2: Scalar

    def with_gamma_offset(self, offset) -> "ScaledParams":
        if offset == 0:
            return self
        return replace(
            self,
            gamma=self.gamma + offset,
            one_minus_gamma_w=self.one_minus_gamma_w - offset / self.scale2,
        )


def _moebius_image(domain: TimeDomain, md: MomentDescriptor) -> TimeDomain:
    def image(T):
        if T is None:
            return None if md.epsilon == 0 else 1 / md.epsilon
        denominator = md.epsilon * T + md.delta
        return None if denominator == 0 else (T + md.psi) / denominator

    return TimeDomain(image(domain.lower), image(domain.upper))


@dataclass(frozen=True)
class Standardization:
    """Z_t = m(t) X_{ell(t)/m(t)} with X = Y - E(Y); optionally followed by t Z_{1/t}."""

    descriptor: MomentDescriptor
    ell: AffineMap
    m: AffineMap
    params: HarnessParams
    scale: object
    inverted: bool = False

    @property
    def scale2(self) -> Scalar:
        md = self.descriptor
        return md.M2 * md.gap * md.gap

    @property
    def domain(self) -> TimeDomain:
        return self.params.domain

    def chain_time(self, t) -> Scalar:
        if self.inverted:
            t = 1 / t
        return self.ell.numerator(t) / self.m.numerator(t)

    def harness_time(self, T) -> Scalar:
        md = self.descriptor
        h = (T + md.psi) / (md.epsilon * T + md.delta)
        return 1 / h if self.inverted else h

    def weight(self, t) -> Scalar:
        """lambda m(t), or t lambda m(1/t) after inversion."""
        if self.inverted:
            return t * self.m.numerator(1 / t)
        return self.m.numerator(t)

    def w_value(self, t, y) -> Scalar:
        return self.weight(t) * (y - self.descriptor.mean(self.chain_time(t)))

    def z_value(self, t, y):
        return self.w_value(t, y) / self.scale

    def y_from_w(self, t, w) -> Scalar:
        return w / self.weight(t) + self.descriptor.mean(self.chain_time(t))

    def y_from_z(self, t, z) -> Scalar:
        w = exact(z * self.scale)
        if isinstance(w, sympy.Basic):
            raise InvalidState(f"Z={z} has no rational Y at t={t}")
        return self.y_from_w(t, w)

    def scaled(self) -> ScaledParams:
        md = self.descriptor
        chi, gap = md.chi, md.gap
        eta_w = (md.delta * md.eta0 + md.epsilon * (2 * md.beta + md.theta0)) / (chi * gap)
        theta_w = (2 * md.beta + md.psi * md.eta0 + md.theta0) / (chi * gap)
        sigma_w = md.epsilon * md.epsilon / (chi * gap * gap)
        tau_w = 1 / (chi * gap * gap)
        one_minus_gamma_w = -2 * md.epsilon * abs(md.epsilon) / (chi * gap * gap)
        sigma, tau = self.params.sigma, self.params.tau
        if self.inverted:
            eta_w, theta_w, sigma_w, tau_w = theta_w, eta_w, tau_w, sigma_w
        return ScaledParams(
            eta_w, theta_w, sigma_w, tau_w, one_minus_gamma_w, sigma, tau, self.params.gamma, self.scale2
        )

    def time_inverted(self) -> "Standardization":
        domain = self.params.domain
        flipped = TimeDomain(
            0 if domain.upper is None else 1 / domain.upper,
            None if not domain.lower else 1 / domain.lower,
        )
        return replace(self, params=self.params.swapped(flipped), inverted=not self.inverted)


def mobius_standardize(md: MomentDescriptor, chain_domain: Optional[TimeDomain] = None) -> Standardization:
    md.validate()
    M = scalar_sqrt(md.M2)
    scale = M * md.gap
    chi = md.chi
    eta = M * ((md.delta * md.eta0 + md.epsilon * (2 * md.beta + md.theta0)) / chi)
    theta = M * ((2 * md.beta + md.psi * md.eta0 + md.theta0) / chi)
    sigma = md.M2 * md.epsilon * md.epsilon / chi
    tau = md.M2 / chi
    gamma = 1 + 2 * md.epsilon * abs(md.epsilon) * md.M2 / chi
    domain = _moebius_image(chain_domain, md) if chain_domain is not None else TimeDomain(0, None)
    params = HarnessParams(eta, theta, sigma, tau, gamma, domain)
    ell = AffineMap(md.delta, -md.psi, scale)
    m = AffineMap(-md.epsilon, as_mode(1, _mode(md)), scale)
    logger.debug(f"standardized descriptor {md}: sigma={sigma}, tau={tau}, gamma={gamma}")
    return Standardization(md, ell, m, params, scale)


def _mode(md: MomentDescriptor) -> Mode:
    return same_mode(md.alpha, md.beta, md.M2, md.psi, md.delta, md.epsilon) or Mode.EXACT


def main_descriptor(p: ChainParams) -> MomentDescriptor:
    if p.N == 0:
        raise DegenerateChain("a chain with N = 0 has a single state")
    epsilon = _sign(p.case)
    alpha, beta = y_mean_coefficients(p)
    return MomentDescriptor(
        alpha=alpha,
        beta=beta,
        M2=epsilon * cov_factor(p),
        psi=p.A + p.B,
        delta=epsilon * (p.A - p.C + p.N),
        epsilon=as_mode(epsilon, p.mode),
        eta0=as_mode(-1, p.mode),
        theta0=as_mode(0, p.mode),
    )


def k_chain_descriptor(K: int, A, B) -> MomentDescriptor:
    if K < 1:
        raise DegenerateChain("the K-chain with K = 0 has a single state")
    mode = same_mode(A, B) or Mode.EXACT
    A, B = as_mode(A, mode), as_mode(B, mode)
    return MomentDescriptor(
        alpha=A * A + K * (A + B),
        beta=A + K,
        M2=K * (K + A - B),
        psi=A + B,
        delta=as_mode(1, mode),
        epsilon=as_mode(0, mode),
        eta0=as_mode(-1, mode),
        theta0=as_mode(0, mode),
    )


def dual_descriptor(p: ChainParams) -> MomentDescriptor:
    """Descriptor of the Theta-randomized dual process on (A+N-C, inf)."""
    if p.case is not Case.CASE1:
        raise WrongCase("the dual process exists only in Case 1")
    main = main_descriptor(p)
    return MomentDescriptor(
        alpha=-main.alpha,
        beta=main.beta,
        M2=main.M2,
        psi=p.C - p.A - p.N,
        delta=-(p.A + p.B),
        epsilon=as_mode(1, p.mode),
        eta0=as_mode(1, p.mode),
        theta0=as_mode(0, p.mode),
    )


def main_standardization(p: ChainParams) -> Standardization:
    return mobius_standardize(main_descriptor(p), time_domain(p))


def k_chain_standardization(K: int, A, B) -> Standardization:
    md = k_chain_descriptor(K, A, B)
    return mobius_standardize(md, TimeDomain(-md.psi, None))


def dual_standardization(p: ChainParams) -> Standardization:
    """Dual process standardized on (0,1), then inverted in time onto (1,inf).

    On (0,1) eta and theta come out swapped; after t -> t Z_{1/t} they equal the
    Case 1 parameters and the map is W_t = (t-1) X~ at time phi'(t) = -phi(t).
    """
    return mobius_standardize(dual_descriptor(p), dual_time_domain(p)).time_inverted()


def case_harness_params(p: ChainParams) -> HarnessParams:
    """Closed-form parameters; Case 1 on (0,1), Case 2 on (0,inf)."""
    A, B, C, N = p.A, p.B, p.C, p.N
    if N == 0:
        raise DegenerateChain("a chain with N = 0 has a single state")
    num_eta = A * (B + C + N) + C * (B + C) + N * (N - B)
    num_theta = A * (B + C + N) - B * (B + C - N) + 2 * C * N
    base = N * (A + C) * (B + C) * (A - B + N)
    if p.case is Case.CASE1:
        root = scalar_sqrt(base * (N - 1 - B - C))
        sigma = 1 / (N - 1 - B - C)
        eta, theta = -num_eta / root, -num_theta / root
        domain = TimeDomain(as_mode(0, p.mode), as_mode(1, p.mode))
    else:
        root = scalar_sqrt(base * (B + C - N + 1))
        sigma = 1 / (B + C - N + 1)
        eta, theta = -num_eta / root, num_theta / root
        domain = TimeDomain(as_mode(0, p.mode), None)
    gamma = (B + C - N - 1) / (B + C - N + 1)
    return HarnessParams(eta, theta, sigma, sigma, gamma, domain)


def k_chain_harness_params(K: int, A, B) -> HarnessParams:
    """eta = -1/sqrt(K(A-B+K)), theta = (A-B+2K)/sqrt(K(A-B+K)), sigma=0, tau=1, gamma=1.

    These are the parameters of the un-negated standardized K-chain: the
    Moebius map of its own descriptor yields the negative eta, and so does the
    C -> -infinity limit of the Case 1 parameters. The negated process -Z has
    eta = +1/sqrt(K(A-B+K)) and theta of opposite sign.
    """
    if K < 1:
        raise DegenerateChain("the K-chain with K = 0 has a single state")
    mode = same_mode(A, B) or Mode.EXACT
    A, B = as_mode(A, mode), as_mode(B, mode)
    root = scalar_sqrt(K * (A - B + K))
    zero, one = as_mode(0, mode), as_mode(1, mode)
    return HarnessParams(-1 / root, (A - B + 2 * K) / root, zero, one, one, TimeDomain(zero, None))


def standardization_for(p: ChainParams, branch: Branch = Branch.MAIN) -> Standardization:
    if branch is Branch.DUAL:
        return dual_standardization(p)
    return main_standardization(p)


def z_from_y(p: ChainParams, branch: Branch, t, y):
    st = standardization_for(p, branch)
    t = as_mode(t, p.mode)
    st.domain.require(t)
    return st.z_value(t, y)


def y_from_z(p: ChainParams, branch: Branch, t, z) -> Scalar:
    st = standardization_for(p, branch)
    t = as_mode(t, p.mode)
    st.domain.require(t)
    return st.y_from_z(t, z)


def standardized_grid_law(
    chain: MarkovChain, st: Standardization, times: Sequence, max_atoms: int = DEFAULT_MAX_ATOMS
) -> JointLaw:
    """Exact law of (W_t) on harness ``times``, W = lambda Z."""
    times = tuple(as_mode(t, chain.mode) for t in times)
    st.domain.require(*times)
    chain_times = [st.chain_time(t) for t in times]
    order = sorted(range(len(times)), key=lambda i: chain_times[i])
    joint = joint_law_on_grid(chain, [chain_times[i] for i in order], max_atoms)
    position = {index: rank for rank, index in enumerate(order)}
    atoms: Dict[tuple, Scalar] = {}
    for key, mass in joint.atoms.items():
        values = tuple(
            st.w_value(t, chain.y_value(key[position[i]], chain_times[i])) for i, t in enumerate(times)
        )
        atoms[values] = atoms.get(values, 0) + mass
    return JointLaw(times, atoms)


# -- harness axioms ------------------------------------------------------------


@dataclass(frozen=True)
class AxiomResidual:
    """Largest residual of one axiom family at one time tuple."""

    family: str
    times: Tuple[Scalar, ...]
    residual: Scalar


def _worst(values: Iterable[Scalar]) -> Scalar:
    worst = 0
    for value in values:
        if abs(value) > abs(worst):
            worst = value
    return worst


def _identity(w):
    return w


def q_var_form(sp: ScaledParams, s, t, u, w_s, w_u) -> Scalar:
    """Two-sided conditional variance of W_t with harness parameters ``sp``."""
    tilde = (u * w_s - s * w_u) / (u - s)
    increment = (w_u - w_s) / (u - s)
    quadratic = (
        1
        + sp.eta_w * tilde
        + sp.theta_w * increment
        + sp.sigma_w * tilde * tilde
        + sp.tau_w * increment * increment
        - sp.one_minus_gamma_w * increment * tilde
    )
    return sp.scale2 * (u - t) * (t - s) / (u * (1 + sp.sigma * s) + sp.tau - sp.gamma * s) * quadratic


def harness_residuals(
    law: JointLaw, sp: ScaledParams, *, one_sided: bool = True, two_sided: bool = True
) -> List[AxiomResidual]:
    """Residuals of the quadratic-harness axioms on an exact law of W-values."""
    times = law.times
    results: List[AxiomResidual] = []
    size = len(times)
    for i in range(size):
        results.append(AxiomResidual("mean-zero", (times[i],), law.expectation(lambda key, i=i: key[i])))
        for j in range(i, size):
            second = law.expectation(lambda key, i=i, j=j: key[i] * key[j])
            results.append(
                AxiomResidual("covariance-min", (times[i], times[j]), second - sp.scale2 * min(times[i], times[j]))
            )

    if one_sided:
        for i in range(size):
            for j in range(i + 1, size):
                s, t = times[i], times[j]
                forward = law.conditional_moments(j, [i], _identity)
                backward = law.conditional_moments(i, [j], _identity)
                results.append(AxiomResidual(
                    "forward-mean", (s, t), _worst(mean - w_s for (w_s,), (_, mean, _) in forward.items())
                ))
                results.append(AxiomResidual(
                    "forward-variance",
                    (s, t),
                    _worst(
                        var - sp.scale2 * (t - s) / (1 + sp.sigma * s) * (sp.sigma_w * w_s * w_s + sp.eta_w * w_s + 1)
                        for (w_s,), (_, _, var) in forward.items()
                    ),
                ))
                results.append(AxiomResidual(
                    "backward-mean", (s, t), _worst(mean - s / t * w_t for (w_t,), (_, mean, _) in backward.items())
                ))
                results.append(AxiomResidual(
                    "backward-variance",
                    (s, t),
                    _worst(
                        var
                        - sp.scale2 * s * (t - s) / (t + sp.tau)
                        * (sp.tau_w * w_t * w_t / (t * t) + sp.theta_w * w_t / t + 1)
                        for (w_t,), (_, _, var) in backward.items()
                    ),
                ))

    if two_sided:
        for i in range(size):
            for j in range(i + 1, size):
                for k in range(j + 1, size):
                    s, t, u = times[i], times[j], times[k]
                    moments = law.conditional_moments(j, [i, k], _identity)
                    results.append(AxiomResidual(
                        "two-sided-mean",
                        (s, t, u),
                        _worst(
                            mean - ((u - t) * w_s + (t - s) * w_u) / (u - s)
                            for (w_s, w_u), (_, mean, _) in moments.items()
                        ),
                    ))
                    results.append(AxiomResidual(
                        "two-sided-variance",
                        (s, t, u),
                        _worst(
                            var - q_var_form(sp, s, t, u, w_s, w_u)
                            for (w_s, w_u), (_, _, var) in moments.items()
                        ),
                    ))
    return results
