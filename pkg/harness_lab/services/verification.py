"""
Verification suites.

Every check reduces a family of identities at one parameter point to a single
residual. Exact checks pass only on a residual of exactly zero; float and
Monte Carlo checks compare against a tolerance. Failures are reported, never
raised.
"""

import logging
import math
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from itertools import combinations, product
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from harness_lab import __version__
from harness_lab.helpers.helper import format_scalar
from harness_lab.models.errors import ConfigError, HarnessLabError, InvalidParams, ZeroDenominator
from harness_lab.models.model import (
    Branch,
    Case,
    CheckMode,
    CheckResult,
    CoverageEntry,
    Mode,
    ParamPoint,
    ReportSummary,
    Suite,
    VerificationConfig,
    VerificationReport,
)
from harness_lab.services.harness import (
    AXIOM_FAMILIES,
    case_harness_params,
    dual_descriptor,
    dual_standardization,
    harness_residuals,
    k_chain_conditional_moments,
    k_chain_harness_params,
    k_chain_reverse_moments,
    k_chain_standardization,
    k_chain_y_cov,
    k_chain_y_moments,
    main_standardization,
    main_two_sided_moments,
    mobius_standardize,
    reverse_moments,
    standardized_grid_law,
    y_conditional_moments,
    y_cov,
    y_from_z,
    y_moments,
    y_two_sided_moments,
    z_from_y,
)
from harness_lab.services.markov import (
    ChainParams,
    DualChain,
    JointLaw,
    KChain,
    MainChain,
    MarkovChain,
    TimeDomain,
    dual_time_domain,
    joint_law_on_grid,
    k_chain_two_sided_law,
    line_intersections,
    reverse_law,
    sample_paths,
    time_domain,
    transition_matrix,
    two_sided_law,
    univariate_law,
    y_value,
)
from harness_lab.services.scalar import Scalar, is_zero
from harness_lab.services.stitching import (
    dual_y_moments,
    extension_check,
    limit_growth,
    mean_square_gap,
    mixture_joint_law,
    sample_stitched_paths,
    stitch_constants,
    stitched_joint_law,
    stitched_w,
    stitched_z_matrix,
    theta_conditional_law,
    theta_conditional_moments,
    theta_endpoint_joint,
    theta_law,
    theta_moments,
)
from harness_lab.services.wilson import (
    DiscreteLaw,
    LawParams6j,
    big_pi_law,
    limit_pi_from_p,
    pi_law,
    pi_weight,
    pi_weight_alternating,
    u_moments,
    validate_6j,
    validate_pi,
    wilson_law,
    wilson_weight,
    x_moments_pi,
    y_moments_6j,
)

logger = logging.getLogger(__name__)

DETERMINISM_PATHS = 64
LIMIT_PI_POINTS = ((1.0, 0.5), (0.5, 0.25))
LIMIT_PI_K_MAX = 2


@dataclass(frozen=True)
class CheckTask:
    check_id: str
    tag: str
    point: str
    mode: CheckMode
    tolerance: float
    run: Callable[[], Scalar]


def _exact(check_id: str, point: str, run: Callable[[], Scalar]) -> CheckTask:
    return CheckTask(check_id, check_id.split(".", 1)[1], point, CheckMode.EXACT, 0.0, run)


def _float(check_id: str, point: str, tolerance: float, run: Callable[[], Scalar]) -> CheckTask:
    return CheckTask(check_id, check_id.split(".", 1)[1], point, CheckMode.FLOAT, tolerance, run)


def _passes(residual, tolerance: float) -> bool:
    if tolerance == 0:
        return is_zero(residual)
    value = abs(float(residual))
    return not math.isnan(value) and value <= tolerance


def _max_abs(values: Iterable[Scalar]) -> Scalar:
    worst = 0
    for value in values:
        if abs(value) > abs(worst):
            worst = value
    return worst


def chain_grid(domain: TimeDomain) -> List[Scalar]:
    """Quartiles of a bounded domain; lower + {1/2, 1, 3/2, 5/2} otherwise."""
    lower = domain.lower
    if domain.upper is None:
        return [lower + Fraction(i, 2) for i in (1, 2, 3, 5)]
    width = domain.upper - lower
    return [lower + width * Fraction(i, 4) for i in (1, 2, 3)]


def _rationals(values: Sequence[str]) -> List[Fraction]:
    return [Fraction(value) for value in values]


def _w6j(k: int, N: int, a, b, c) -> Scalar:
    return wilson_weight(k, LawParams6j(a, b, c, N), validate=False)


def _pi(j: int, K: int, a, b) -> Scalar:
    return pi_weight(j, K, a, b, allow_out_of_range=True)


def _conditional_laws(law: JointLaw, target: int, given: Sequence[int]) -> Dict[tuple, Dict[int, Scalar]]:
    """Law of the state at ``target`` for each conditioning tuple of positive mass."""
    masses: Dict[tuple, Dict[int, Scalar]] = defaultdict(lambda: defaultdict(int))
    for key, mass in law.atoms.items():
        if mass != 0:
            masses[tuple(key[i] for i in given)][key[target]] += mass
    result = {}
    for condition, row in masses.items():
        total = sum(row.values())
        result[condition] = {state: mass / total for state, mass in row.items()}
    return result


def _law_gap(found: Dict[int, Scalar], expected: DiscreteLaw) -> Scalar:
    wanted = expected.as_dict()
    return _max_abs(found.get(state, 0) - wanted.get(state, 0) for state in set(found) | set(wanted))


def _skipping_zero_denominators(terms: Iterable[Callable[[], Scalar]]) -> Scalar:
    """Largest residual over the terms that evaluate; raises only when none does."""
    residuals = []
    for term in terms:
        try:
            residuals.append(term())
        except ZeroDenominator:
            continue
    if not residuals:
        raise ZeroDenominator("every term hits a zero denominator")
    return _max_abs(residuals)


# -- identity checks -----------------------------------------------------------


def _valid_6j_sizes(a, b, c, n_max: int) -> List[int]:
    sizes = []
    for N in range(n_max + 1):
        try:
            validate_6j(LawParams6j(a, b, c, N))
        except InvalidParams:
            continue
        sizes.append(N)
    return sizes


def check_wilson_normalization(a, b, c, n_max: int) -> Scalar:
    return _max_abs(
        wilson_law(LawParams6j(a, b, c, N)).total() - 1 for N in _valid_6j_sizes(a, b, c, n_max)
    )


def check_wilson_moments(a, b, c, n_max: int) -> Scalar:
    residuals = []
    for N in _valid_6j_sizes(a, b, c, n_max):
        params = LawParams6j(a, b, c, N)
        mean, variance = y_moments_6j(params)
        found_mean, found_variance = wilson_law(params).moments(lambda k: k * (2 * a + k))
        residuals += [mean - found_mean, variance - found_variance]
    return _max_abs(residuals)


def check_product_rule(a, b, c, delta, n_max: int) -> Scalar:
    """Reverse law times marginal equals marginal times transition, cross-multiplied."""

    def term(j, k, N):
        left = _w6j(j, k, a, b, a + k + 2 * delta) * _w6j(k, N, a + delta, b + delta, c)
        right = _w6j(j, N, a, b, c + delta) * _w6j(k - j, N - j, a + j + delta, -a - j + delta, c)
        return left - right

    return _skipping_zero_denominators(
        partial(term, j, k, N) for N in range(n_max + 1) for k in range(N + 1) for j in range(k + 1)
    )


def check_convolution(a, b, c, delta, n_max: int) -> Scalar:
    def term(k, N):
        total = sum(
            _w6j(j, N, a, b, c + delta) * _w6j(k - j, N - j, a + j + delta, -a - j + delta, c)
            for j in range(k + 1)
        )
        return _w6j(k, N, a + delta, b + delta, c) - total

    return _skipping_zero_denominators(partial(term, k, N) for N in range(n_max + 1) for k in range(N + 1))


def check_pi_normalization(a, b, k_max: int) -> Scalar:
    return _max_abs(pi_law(K, a, b).total() - 1 for K in range(k_max + 1))


def check_pi_moments(a, b, k_max: int) -> Scalar:
    residuals = []
    for K in range(k_max + 1):
        mean, variance = x_moments_pi(K, a, b)
        found_mean, found_variance = pi_law(K, a, b).moments(lambda j: j * (a + j))
        residuals += [mean - found_mean, variance - found_variance]
    return _max_abs(residuals)


def check_pi_product_rule(a, b, delta, k_max: int) -> Scalar:
    def term(j, k, K):
        left = _pi(j, K, a, b) * _pi(k - j, K - j, a + delta + 2 * j, delta)
        right = _w6j(j, k, a / 2, b - a / 2, a / 2 + delta + k) * _pi(k, K, a + delta, b + delta)
        return left - right

    return _skipping_zero_denominators(
        partial(term, j, k, K) for K in range(k_max + 1) for k in range(K + 1) for j in range(k + 1)
    )


def check_pi_alternating(a, b, k_max: int) -> Scalar:
    return _max_abs(
        pi_weight_alternating(j, K, a, b) - pi_weight(j, K, a, b)
        for K in range(k_max + 1)
        for j in range(K + 1)
    )


def check_big_pi_normalization(p: ChainParams) -> Scalar:
    return big_pi_law(p.A + p.C, p.A - p.B + 1, p.N).total() - 1


def check_big_pi_moments(p: ChainParams) -> Scalar:
    a, c = p.A + p.C, p.A - p.B + 1
    mean, variance = u_moments(a, c, p.N)
    found_mean, found_variance = big_pi_law(a, c, p.N).moments(lambda k: k)
    return _max_abs([mean - found_mean, variance - found_variance])


def check_dual_product_rule(p: ChainParams, grid: Sequence[Fraction]) -> Scalar:
    """Dual i -> j -> k transitions against the dual i -> k transition times the bridge weight."""
    st = dual_standardization(p)
    chain_times = sorted(st.chain_time(t) for t in grid)
    A, N = p.A, p.N

    def term(K, i, j, k, s, t, u):
        left = _pi(j - K, i - K, 2 * A + 2 * K - t, 2 * A + i + K - s) * _pi(
            k - K, j - K, 2 * A + 2 * K - u, 2 * A + j + K - t
        )
        right = _pi(k - K, i - K, 2 * A + 2 * K - u, 2 * A + i + K - s) * _w6j(
            j - k, i - k, A + k - t / 2, u - t / 2 - A - k, i + A + t / 2 - s
        )
        return left - right

    return _skipping_zero_denominators(
        partial(term, K, i, j, k, s, t, u)
        for s, t, u in combinations(chain_times, 3)
        for K in range(N + 1)
        for i in range(K, N + 1)
        for j in range(K, i + 1)
        for k in range(K, j + 1)
    )


def check_pi_limit(c: float) -> float:
    return max(
        abs(limit_pi_from_p(j, K, a, b, c) - pi_weight(j, K, a, b))
        for a, b in LIMIT_PI_POINTS
        for K in range(LIMIT_PI_K_MAX + 1)
        for j in range(K + 1)
    )


# -- the service ---------------------------------------------------------------


class VerificationService:
    """Builds the check tasks of each suite, runs them and assembles reports."""

    def __init__(self, config: Optional[VerificationConfig] = None):
        self.config = config or VerificationConfig()
        self.gamma_offset = Fraction(self.config.gamma_perturbation)
        self._memo_lock = threading.Lock()
        self._memo_store: Dict[tuple, object] = {}
        if self.gamma_offset != 0:
            logger.warning(f"gamma perturbed by {self.gamma_offset} in harness checks")

    # -- plumbing --------------------------------------------------------------

    def _memo(self, key: tuple, compute: Callable[[], object]):
        with self._memo_lock:
            if key in self._memo_store:
                return self._memo_store[key]
        value = compute()
        with self._memo_lock:
            self._memo_store.setdefault(key, value)
        return value

    def _joint(self, chain: MarkovChain, times: Sequence) -> JointLaw:
        times = tuple(times)
        return self._memo(
            ("joint", repr(chain), chain.mode, times),
            lambda: joint_law_on_grid(chain, times, self.config.max_atoms),
        )

    def _chain_params(self, point: ParamPoint, mode: Mode = Mode.EXACT) -> ChainParams:
        try:
            return ChainParams.create(point.A, point.B, point.C, point.N, mode=mode)
        except InvalidParams as e:
            raise ConfigError(f"parameter point {point.label()}: {e}") from e

    def _points(self, points: Sequence[ParamPoint], case: Optional[Case] = None) -> List[ChainParams]:
        params = [self._chain_params(point) for point in points]
        for p in params:
            if case is not None and p.case is not case:
                raise ConfigError(f"parameter point {p.label()} is {p.case.value}, expected {case.value}")
        return params

    def _check(self, task: CheckTask) -> CheckResult:
        started = time.perf_counter()
        residual, passed, skipped, detail = 0, False, False, ""
        try:
            residual = task.run()
            passed = _passes(residual, task.tolerance)
        except ZeroDenominator as e:
            skipped = True
            detail = str(e)
            logger.warning(f"{task.check_id} [{task.point}] skipped: {e}")
        except HarnessLabError as e:
            detail = f"{type(e).__name__}: {e}"
            logger.error(f"{task.check_id} [{task.point}] raised {detail}")
        except Exception as e:
            detail = f"{type(e).__name__}: {e}"
            logger.exception(f"{task.check_id} [{task.point}] crashed")
        if not passed and not skipped and not detail:
            logger.warning(f"{task.check_id} [{task.point}] failed with residual {format_scalar(residual)}")
        runtime_ms = int((time.perf_counter() - started) * 1000) if self.config.record_timings else 0
        return CheckResult(
            check_id=task.check_id,
            tag=task.tag,
            parameter_point=task.point,
            mode=task.mode,
            residual=format_scalar(residual),
            passed=passed,
            skipped=skipped,
            runtime_ms=runtime_ms,
            detail=detail,
        )

    def _execute(self, tasks: List[CheckTask]) -> List[CheckResult]:
        workers = self.config.workers
        logger.info(f"running {len(tasks)} checks with {workers} worker(s)")
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(self._check, tasks))
        else:
            results = [self._check(task) for task in tasks]
        return sorted(results, key=lambda result: (result.check_id, result.parameter_point))

    def _report(self, suite: Suite, seed: int, results: List[CheckResult], notes: List[str]) -> VerificationReport:
        summary = ReportSummary(
            total=len(results),
            passed=sum(result.passed for result in results),
            skipped=sum(result.skipped for result in results),
        )
        summary.failed = summary.total - summary.passed - summary.skipped
        by_tag: Dict[str, List[CheckResult]] = defaultdict(list)
        for result in results:
            by_tag[result.tag].append(result)
        coverage = [
            CoverageEntry(tag=tag, checks=len(group), passed=sum(result.passed for result in group))
            for tag, group in sorted(by_tag.items())
        ]
        logger.info(
            f"{suite.value}: {summary.passed} passed, {summary.failed} failed, {summary.skipped} skipped"
        )
        return VerificationReport(
            suite=suite,
            version=__version__,
            seed=seed,
            results=results,
            summary=summary,
            coverage=coverage,
            notes=notes,
        )

    def _monte_carlo_note(self, tasks: List[CheckTask]) -> str:
        sigmas = self.config.mc_sigmas
        count = sum(task.mode is CheckMode.MONTE_CARLO and task.tolerance > 0 for task in tasks)
        level = math.erfc(sigmas / math.sqrt(2))
        return (
            f"{count} Monte Carlo checks use a {sigmas:g} sigma threshold per statistic; "
            f"each statistic has false-failure probability {level:.2e}, so by Bonferroni the "
            f"family-wise rate is at most the number of statistics times that value"
        )

    def run(self, suite: Suite = Suite.ALL, seed: Optional[int] = None) -> VerificationReport:
        seed = self.config.seed if seed is None else seed
        builders = {
            Suite.IDENTITIES: self.identity_tasks,
            Suite.MOMENTS: self.moment_tasks,
            Suite.HARNESS: self.harness_tasks,
            Suite.STITCH: self.stitch_tasks,
            Suite.MONTECARLO: partial(self.monte_carlo_tasks, seed),
        }
        selected = list(builders) if suite is Suite.ALL else [suite]
        tasks: List[CheckTask] = []
        for name in selected:
            tasks += builders[name]()
        notes = []
        if Suite.MONTECARLO in selected:
            notes.append(self._monte_carlo_note(tasks))
        if self.gamma_offset != 0:
            notes.append(f"gamma perturbed by {self.gamma_offset} in harness checks")
        return self._report(suite, seed, self._execute(tasks), notes)

    def run_identity_suite(self) -> VerificationReport:
        return self.run(Suite.IDENTITIES)

    def run_moment_suite(self) -> VerificationReport:
        return self.run(Suite.MOMENTS)

    def run_harness_suite(self) -> VerificationReport:
        return self.run(Suite.HARNESS)

    def run_stitch_suite(self) -> VerificationReport:
        return self.run(Suite.STITCH)

    def run_monte_carlo_suite(self, seed: Optional[int] = None) -> VerificationReport:
        return self.run(Suite.MONTECARLO, seed)

    # -- identities ------------------------------------------------------------

    def identity_tasks(self) -> List[CheckTask]:
        cfg = self.config
        n_max = cfg.identity_n_max
        tasks = []
        for a, offset, c in product(_rationals(cfg.identity_a), _rationals(cfg.identity_b_offsets), _rationals(cfg.identity_c)):
            b = -a + offset
            label = f"a={a},b={b},c={c}"
            tasks.append(_exact("identities.wilson-normalization", label, partial(check_wilson_normalization, a, b, c, n_max)))
            tasks.append(_exact("identities.wilson-moments", label, partial(check_wilson_moments, a, b, c, n_max)))
            for delta in _rationals(cfg.identity_delta):
                point = f"{label},delta={delta}"
                tasks.append(_exact("identities.product-rule", point, partial(check_product_rule, a, b, c, delta, n_max)))
                tasks.append(_exact("identities.convolution", point, partial(check_convolution, a, b, c, delta, n_max)))

        for a, b in product(_rationals(cfg.pi_a), _rationals(cfg.pi_b)):
            try:
                validate_pi(1, a, b)
            except InvalidParams:
                logger.debug(f"skipping pi point a={a}, b={b}")
                continue
            label = f"a={a},b={b}"
            tasks.append(_exact("identities.pi-normalization", label, partial(check_pi_normalization, a, b, n_max)))
            tasks.append(_exact("identities.pi-moments", label, partial(check_pi_moments, a, b, n_max)))
            tasks.append(_exact("identities.pi-alternating", label, partial(check_pi_alternating, a, b, n_max)))
            for delta in _rationals(cfg.pi_delta):
                tasks.append(_exact(
                    "identities.pi-product-rule", f"{label},delta={delta}", partial(check_pi_product_rule, a, b, delta, n_max)
                ))

        grid_dual = _rationals(cfg.grid_dual)
        for p in self._points(cfg.case1_points, Case.CASE1):
            tasks.append(_exact("identities.big-pi-normalization", p.label(), partial(check_big_pi_normalization, p)))
            tasks.append(_exact("identities.big-pi-moments", p.label(), partial(check_big_pi_moments, p)))
            tasks.append(_exact("identities.dual-product-rule", p.label(), partial(check_dual_product_rule, p, grid_dual)))

        tasks.append(_float(
            "identities.pi-limit", f"c={cfg.limit_c:g}", cfg.limit_pi_tolerance, partial(check_pi_limit, cfg.limit_c)
        ))
        return tasks

    # -- moments ---------------------------------------------------------------

    def moment_tasks(self) -> List[CheckTask]:
        cfg = self.config
        tasks = []
        main_points = self._points(cfg.case1_points + cfg.case2_points + cfg.minimal_points)
        for p in main_points:
            tasks += self._main_moment_tasks(p)
        for p in self._points(cfg.case1_points, Case.CASE1):
            for K in cfg.k_values:
                tasks += self._k_moment_tasks(KChain.from_params(K, p))
            for K in cfg.k_values:
                if K <= p.N:
                    tasks += self._dual_moment_tasks(DualChain(K, p))
            tasks.append(_exact("moments.dual-theta-moments", p.label(), partial(self._dual_theta_moments, p)))
        return tasks

    def _main_moment_tasks(self, p: ChainParams) -> List[CheckTask]:
        cfg = self.config
        chain = MainChain(p)
        grid = chain_grid(time_domain(p))
        label = p.label()
        tasks = [
            _exact("moments.stochastic", label, partial(self._stochastic, p, grid)),
            _exact("moments.chapman-kolmogorov", label, partial(self._chapman_kolmogorov, chain, grid)),
            _exact("moments.univariate", label, partial(self._univariate, chain, grid)),
            _exact("moments.two-sided-law", label, partial(self._two_sided_law, p, grid)),
            _exact("moments.y-moments", label, partial(self._y_moments, p, grid)),
            _exact("moments.y-covariance", label, partial(self._y_covariance, p, grid)),
            _exact("moments.conditional", label, partial(self._conditional, p, grid)),
            _exact("moments.two-sided", label, partial(self._two_sided, p, grid)),
            _exact("moments.reverse", label, partial(self._reverse, p, grid)),
            _exact("moments.distinct-lines", label, partial(self._distinct_lines, p)),
        ]
        point = ParamPoint(A=str(p.A), B=str(p.B), C=str(p.C), N=p.N)
        pf = self._chain_params(point, Mode.FLOAT)
        tasks += [
            _float("moments.float-agreement", label, cfg.float_tolerance, partial(self._float_agreement, p, pf, grid)),
            _float("moments.endpoint-limit", label, cfg.limit_offset_tolerance, partial(self._endpoint_limit, pf)),
            _float("moments.identity-limit", label, cfg.limit_offset_tolerance, partial(self._identity_limit, pf, grid)),
        ]
        return tasks

    def _stochastic(self, p: ChainParams, grid) -> Scalar:
        return _max_abs(
            total - 1 for s, t in combinations(grid, 2) for total in transition_matrix(p, s, t).row_sums()
        )

    def _chapman_kolmogorov(self, chain: MarkovChain, grid) -> Scalar:
        return _max_abs(
            (chain.transition(s, t) @ chain.transition(t, u)).max_abs_diff(chain.transition(s, u))
            for s, t, u in combinations(grid, 3)
        )

    def _univariate(self, chain: MarkovChain, grid) -> Scalar:
        joint = self._joint(chain, grid)
        return _max_abs(
            joint.univariate(i).total_variation(chain.univariate_law(t)) for i, t in enumerate(joint.times)
        )

    def _y_fn(self, chain: MarkovChain, t):
        return lambda state: chain.y_value(state, t)

    def _two_sided_law(self, p: ChainParams, grid) -> Scalar:
        joint = self._joint(MainChain(p), grid)
        residuals = []
        for i, j, k in combinations(range(len(grid)), 3):
            s, t, u = grid[i], grid[j], grid[k]
            for (k_state, m_state), found in _conditional_laws(joint, j, [i, k]).items():
                residuals.append(_law_gap(found, two_sided_law(p, s, t, u, k_state, m_state)))
        return _max_abs(residuals)

    def _y_moments(self, p: ChainParams, grid) -> Scalar:
        chain = MainChain(p)
        residuals = []
        for t in grid:
            mean, variance = y_moments(p, t)
            found_mean, found_variance = chain.univariate_law(t).moments(self._y_fn(chain, t))
            residuals += [mean - found_mean, variance - found_variance]
        return _max_abs(residuals)

    def _joint_covariance(self, chain: MarkovChain, joint: JointLaw, i: int, j: int) -> Scalar:
        fi, fj = self._y_fn(chain, joint.times[i]), self._y_fn(chain, joint.times[j])
        mean_i = joint.expectation(lambda key: fi(key[i]))
        mean_j = joint.expectation(lambda key: fj(key[j]))
        return joint.expectation(lambda key: fi(key[i]) * fj(key[j])) - mean_i * mean_j

    def _y_covariance(self, p: ChainParams, grid) -> Scalar:
        chain = MainChain(p)
        joint = self._joint(chain, grid)
        return _max_abs(
            y_cov(p, grid[i], grid[j]) - self._joint_covariance(chain, joint, i, j)
            for i in range(len(grid))
            for j in range(i, len(grid))
        )

    def _conditional(self, p: ChainParams, grid) -> Scalar:
        chain = MainChain(p)
        joint = self._joint(chain, grid)
        residuals = []
        for i, j in combinations(range(len(grid)), 2):
            s, t = grid[i], grid[j]
            for (state,), (_, mean, variance) in joint.conditional_moments(j, [i], self._y_fn(chain, t)).items():
                expected_mean, expected_variance = y_conditional_moments(p, s, t, chain.y_value(state, s))
                residuals += [expected_mean - mean, expected_variance - variance]
        return _max_abs(residuals)

    def _two_sided(self, p: ChainParams, grid) -> Scalar:
        chain = MainChain(p)
        joint = self._joint(chain, grid)
        residuals = []
        for i, j, k in combinations(range(len(grid)), 3):
            s, t, u = grid[i], grid[j], grid[k]
            moments = joint.conditional_moments(j, [i, k], self._y_fn(chain, t))
            for (k_state, m_state), (_, mean, variance) in moments.items():
                expected = main_two_sided_moments(
                    p, s, t, u, chain.y_value(k_state, s), chain.y_value(m_state, u)
                )
                residuals += [expected[0] - mean, expected[1] - variance]
        return _max_abs(residuals)

    def _reverse(self, p: ChainParams, grid) -> Scalar:
        chain = MainChain(p)
        joint = self._joint(chain, grid)
        residuals = []
        for i, j in combinations(range(len(grid)), 2):
            t, u = grid[i], grid[j]
            for (state,), (_, mean, variance) in joint.conditional_moments(i, [j], self._y_fn(chain, t)).items():
                expected_mean, expected_variance = reverse_moments(p, t, u, chain.y_value(state, u))
                residuals += [expected_mean - mean, expected_variance - variance]
            for (state,), found in _conditional_laws(joint, i, [j]).items():
                residuals.append(_law_gap(found, reverse_law(p.A, p.B, t, u, state)))
        return _max_abs(residuals)

    def _distinct_lines(self, p: ChainParams) -> int:
        """Number of line crossings inside the time domain."""
        domain = time_domain(p)
        return sum(domain.contains(t) for _, _, t in line_intersections(p))

    def _float_agreement(self, p: ChainParams, pf: ChainParams, grid) -> float:
        """Relative gap between float-mode and exact moments."""
        gaps = []
        for t in grid:
            exact = y_moments(p, t)
            found = y_moments(pf, float(t))
            gaps += [abs(float(x) - y) / max(1.0, abs(float(x))) for x, y in zip(exact, found)]
        return max(gaps)

    def _endpoint_limit(self, pf: ChainParams) -> float:
        """Total variation between the law just after the left endpoint and a point mass at 0."""
        t = time_domain(pf).lower + self.config.limit_offset
        return 1.0 - univariate_law(pf, t).weight(0)

    def _identity_limit(self, pf: ChainParams, grid) -> float:
        s = float(grid[0])
        matrix = transition_matrix(pf, s, s + self.config.limit_offset)
        return max(
            abs(matrix.entry(k, n) - (1.0 if k == n else 0.0)) for k in matrix.states for n in matrix.states
        )

    def _k_moment_tasks(self, chain: KChain) -> List[CheckTask]:
        grid = chain_grid(chain.domain)
        label = f"K={chain.K},A={chain.A},B={chain.B}"
        return [
            _exact("moments.k-chapman-kolmogorov", label, partial(self._chapman_kolmogorov, chain, grid)),
            _exact("moments.k-univariate", label, partial(self._univariate, chain, grid)),
            _exact("moments.k-moments", label, partial(self._k_moments, chain, grid)),
            _exact("moments.k-two-sided-law", label, partial(self._k_two_sided_law, chain, grid)),
            _exact("moments.k-reverse-law", label, partial(self._k_reverse_law, chain, grid)),
        ]

    def _k_moments(self, chain: KChain, grid) -> Scalar:
        K, A, B = chain.K, chain.A, chain.B
        joint = self._joint(chain, grid)
        residuals = []
        for i, t in enumerate(grid):
            mean, variance = k_chain_y_moments(K, A, B, t)
            found_mean, found_variance = joint.univariate(i).moments(self._y_fn(chain, t))
            residuals += [mean - found_mean, variance - found_variance]
        for i, j in combinations(range(len(grid)), 2):
            s, t = grid[i], grid[j]
            residuals.append(k_chain_y_cov(K, A, B, s, t) - self._joint_covariance(chain, joint, i, j))
            for (state,), (_, mean, variance) in joint.conditional_moments(j, [i], self._y_fn(chain, t)).items():
                expected = k_chain_conditional_moments(K, A, B, s, t, chain.y_value(state, s))
                residuals += [expected[0] - mean, expected[1] - variance]
            for (state,), (_, mean, variance) in joint.conditional_moments(i, [j], self._y_fn(chain, s)).items():
                expected = k_chain_reverse_moments(K, A, B, s, t, chain.y_value(state, t))
                residuals += [expected[0] - mean, expected[1] - variance]
        return _max_abs(residuals)

    def _k_two_sided_law(self, chain: KChain, grid) -> Scalar:
        joint = self._joint(chain, grid)
        residuals = []
        for i, j, k in combinations(range(len(grid)), 3):
            for (k_state, m_state), found in _conditional_laws(joint, j, [i, k]).items():
                expected = k_chain_two_sided_law(chain.K, chain.A, chain.B, grid[i], grid[j], grid[k], k_state, m_state)
                residuals.append(_law_gap(found, expected))
        return _max_abs(residuals)

    def _k_reverse_law(self, chain: KChain, grid) -> Scalar:
        """The reverse law does not depend on K."""
        joint = self._joint(chain, grid)
        residuals = []
        for i, j in combinations(range(len(grid)), 2):
            for (state,), found in _conditional_laws(joint, i, [j]).items():
                residuals.append(_law_gap(found, reverse_law(chain.A, chain.B, grid[i], grid[j], state)))
        return _max_abs(residuals)

    def _dual_moment_tasks(self, chain: DualChain) -> List[CheckTask]:
        grid = chain_grid(chain.domain)
        label = f"K={chain.K},{chain.params.label()}"
        return [
            _exact("moments.dual-chapman-kolmogorov", label, partial(self._chapman_kolmogorov, chain, grid)),
            _exact("moments.dual-univariate", label, partial(self._univariate, chain, grid)),
            _exact("moments.dual-moments", label, partial(self._dual_moments, chain, grid)),
            _exact("moments.dual-two-sided", label, partial(self._dual_two_sided, chain, grid)),
        ]

    def _dual_moments(self, chain: DualChain, grid) -> Scalar:
        joint = self._joint(chain, grid)
        residuals = []
        for i in range(len(grid)):
            for j in range(i, len(grid)):
                mean, covariance = dual_y_moments(chain.params, grid[i], grid[j], chain.K)
                t = grid[j]
                found_mean = joint.expectation(lambda key: chain.y_value(key[j], t))
                residuals += [mean - found_mean, covariance - self._joint_covariance(chain, joint, i, j)]
        return _max_abs(residuals)

    def _dual_two_sided(self, chain: DualChain, grid) -> Scalar:
        joint = self._joint(chain, grid)
        residuals = []
        for i, j, k in combinations(range(len(grid)), 3):
            s, t, u = grid[i], grid[j], grid[k]
            for (k_state, m_state), (_, mean, variance) in joint.conditional_moments(j, [i, k], self._y_fn(chain, t)).items():
                expected = y_two_sided_moments(
                    s, t, u, chain.y_value(k_state, s), chain.y_value(m_state, u), dual=True
                )
                residuals += [expected[0] - mean, expected[1] - variance]
        return _max_abs(residuals)

    def _dual_theta_moments(self, p: ChainParams) -> Scalar:
        """Theta-randomized dual moments against the mixture of the dual chains."""
        grid = chain_grid(dual_time_domain(p))
        residuals = []
        for i in range(len(grid)):
            for j in range(i, len(grid)):
                s, t = grid[i], grid[j]
                mean_s = mean_t = second = 0
                for k, weight in theta_law(p):
                    chain = DualChain(k, p)
                    joint = self._joint(chain, grid)
                    mean_s += weight * joint.expectation(lambda key: chain.y_value(key[i], s))
                    mean_t += weight * joint.expectation(lambda key: chain.y_value(key[j], t))
                    second += weight * joint.expectation(
                        lambda key: chain.y_value(key[i], s) * chain.y_value(key[j], t)
                    )
                mean, covariance = dual_y_moments(p, s, t)
                residuals += [mean - mean_t, covariance - (second - mean_s * mean_t)]
        return _max_abs(residuals)

    # -- harness ---------------------------------------------------------------

    def _axiom_tasks(self, prefix: str, label: str, compute: Callable[[], list]) -> List[CheckTask]:
        def family_residual(family: str) -> Scalar:
            residuals = self._memo(("axioms", prefix, label), compute)
            return _max_abs(r.residual for r in residuals if r.family == family)

        return [
            CheckTask(f"{prefix}.{family}", family, label, CheckMode.EXACT, 0.0, partial(family_residual, family))
            for family in AXIOM_FAMILIES
        ]

    def _params_residual(self, found, expected) -> Scalar:
        if found.matches(expected):
            return 0
        return max(abs(x - y) for x, y in zip(found.floats().values(), expected.floats().values()))

    def harness_tasks(self) -> List[CheckTask]:
        cfg = self.config
        tasks = []
        grids = {Case.CASE1: _rationals(cfg.grid_unit), Case.CASE2: _rationals(cfg.grid_half_line)}
        for p in self._points(cfg.case1_points + cfg.case2_points):
            label = p.label()
            grid = grids[p.case]
            tasks.append(_exact("harness.params", label, partial(self._main_params, p)))
            tasks.append(_exact("harness.gamma-identity", label, partial(self._gamma_identity, p)))
            tasks.append(_exact("harness.z-round-trip", label, partial(self._z_round_trip, p, Branch.MAIN, grid)))
            tasks += self._axiom_tasks("harness.main", label, partial(self._main_axioms, p, grid))

        grid_half_line = _rationals(cfg.grid_half_line)
        grid_dual = _rationals(cfg.grid_dual)
        for p in self._points(cfg.case1_points, Case.CASE1):
            for K in cfg.k_values:
                if K < 1:
                    continue
                label = f"K={K},A={p.A},B={p.B}"
                tasks.append(_exact("harness.k-params", label, partial(self._k_params, K, p)))
                tasks += self._axiom_tasks("harness.k-chain", label, partial(self._k_axioms, K, p, grid_half_line))
                tasks.append(_float(
                    "harness.k-limit", label, cfg.limit_harness_tolerance, partial(self._k_limit, K, p)
                ))
            label = p.label()
            tasks.append(_exact("harness.dual-params", label, partial(self._dual_params, p)))
            tasks.append(_exact("harness.dual-swap", label, partial(self._dual_swap, p)))
            tasks.append(_exact("harness.dual-map", label, partial(self._dual_map, p, grid_dual)))
            tasks.append(_exact("harness.dual-z-round-trip", label, partial(self._z_round_trip, p, Branch.DUAL, grid_dual)))
            tasks += self._axiom_tasks("harness.dual", label, partial(self._stitched_axioms, p, grid_dual))
        return tasks

    def _main_params(self, p: ChainParams) -> Scalar:
        return self._params_residual(main_standardization(p).params, case_harness_params(p))

    def _gamma_identity(self, p: ChainParams) -> Scalar:
        sign = 1 if p.case is Case.CASE1 else -1
        return case_harness_params(p).gamma_residual(sign)

    def _z_round_trip(self, p: ChainParams, branch: Branch, grid) -> Scalar:
        st = main_standardization(p) if branch is Branch.MAIN else dual_standardization(p)
        residuals = []
        for t in grid:
            chain_time = st.chain_time(t)
            for state in range(p.N + 1):
                y = y_value(state, p.A, chain_time, dual=branch is Branch.DUAL)
                residuals.append(y_from_z(p, branch, t, z_from_y(p, branch, t, y)) - y)
        return _max_abs(residuals)

    def _main_axioms(self, p: ChainParams, grid) -> list:
        st = main_standardization(p)
        law = standardized_grid_law(MainChain(p), st, grid, self.config.max_atoms)
        return harness_residuals(law, st.scaled().with_gamma_offset(self.gamma_offset))

    def _k_params(self, K: int, p: ChainParams) -> Scalar:
        return self._params_residual(k_chain_standardization(K, p.A, p.B).params, k_chain_harness_params(K, p.A, p.B))

    def _k_axioms(self, K: int, p: ChainParams, grid) -> list:
        st = k_chain_standardization(K, p.A, p.B)
        law = standardized_grid_law(KChain(K, p.A, p.B, p.mode), st, grid, self.config.max_atoms)
        return harness_residuals(law, st.scaled().with_gamma_offset(self.gamma_offset))

    def _k_limit(self, K: int, p: ChainParams) -> float:
        """Case 1 parameters at C -> -infinity with N = K, rescaled by a = sqrt(-C), against the K-chain."""
        C = self.config.limit_c
        pf = ChainParams.create(float(p.A), float(p.B), C, K, mode=Mode.FLOAT, case=Case.CASE1)
        found = case_harness_params(pf)
        a = math.sqrt(-C)
        rescaled = (
            float(found.eta) / a,
            float(found.theta) * a,
            float(found.sigma) / a**2,
            float(found.tau) * a**2,
            float(found.gamma),
        )
        expected = k_chain_harness_params(K, float(p.A), float(p.B)).floats().values()
        return max(abs(x - y) for x, y in zip(rescaled, expected))

    def _dual_params(self, p: ChainParams) -> Scalar:
        return self._params_residual(dual_standardization(p).params, case_harness_params(p))

    def _dual_swap(self, p: ChainParams) -> Scalar:
        """Before the time inversion, eta and theta of the dual process come out swapped."""
        before = mobius_standardize(dual_descriptor(p), dual_time_domain(p)).params
        return self._params_residual(before, case_harness_params(p).swapped(before.domain))

    def _dual_map(self, p: ChainParams, grid) -> Scalar:
        """The inverted dual standardization is the right half of the stitched process."""
        st, sc = dual_standardization(p), stitch_constants(p)
        residuals = []
        for t in grid:
            residuals.append(st.chain_time(t) - sc.phi_prime(t))
            for state in range(p.N + 1):
                y = y_value(state, p.A, st.chain_time(t), dual=True)
                residuals.append(st.w_value(t, y) - stitched_w(sc, t, y=y))
        return _max_abs(residuals)

    def _stitched_axioms(self, p: ChainParams, grid) -> list:
        law = stitched_joint_law(p, grid, self.config.max_atoms).grid_law()
        sp = stitch_constants(p).standardization.scaled().with_gamma_offset(self.gamma_offset)
        return harness_residuals(law, sp)

    # -- stitching -------------------------------------------------------------

    def stitch_tasks(self) -> List[CheckTask]:
        cfg = self.config
        tasks = []
        grid_unit = _rationals(cfg.grid_unit)
        grid_dual = _rationals(cfg.grid_dual)
        for p in self._points(cfg.case1_points, Case.CASE1):
            label = p.label()
            tasks += [
                _exact("stitch.reductions", label, partial(self._reductions, p, grid_unit, grid_dual)),
                _exact("stitch.theta-law", label, partial(self._theta_law, p)),
                _exact("stitch.theta-moments", label, partial(self._theta_moments, p)),
                _exact("stitch.mixture", label, partial(self._mixture, p)),
                _exact("stitch.theta-conditional-law", label, partial(self._theta_conditional_law, p, grid_unit, grid_dual)),
                _exact(
                    "stitch.theta-conditional-moments", label,
                    partial(self._theta_conditional_moments, p, grid_unit, grid_dual),
                ),
                _exact("stitch.mean-square-gap", label, partial(self._mean_square_gap, p)),
                _float("stitch.theta-limit", label, cfg.limit_theta_tolerance, partial(self._theta_limit, p)),
                _float("stitch.growth", label, cfg.limit_growth_tolerance, partial(self._growth, p)),
            ]
            for grid in cfg.stitched_grids:
                times = _rationals(grid)
                point = f"{label};grid={','.join(str(t) for t in times)}"
                tasks += self._axiom_tasks("stitch.stitched", point, partial(self._stitched_axioms, p, times))
                tasks.append(_exact("stitch.extension", point, partial(self._extension, p, times)))
        return tasks

    def _reductions(self, p: ChainParams, left, right) -> Scalar:
        sc = stitch_constants(p)
        return _max_abs(value for s, u in product(left, right) for value in sc.reductions(s, u))

    def _theta_law(self, p: ChainParams) -> Scalar:
        return theta_law(p).total() - 1

    def _theta_moments(self, p: ChainParams) -> Scalar:
        mean, variance = theta_moments(p)
        found_mean, found_variance = theta_law(p).moments(lambda k: k)
        u_mean, u_variance = u_moments(p.A + p.C, p.A - p.B + 1, p.N)
        return _max_abs([mean - found_mean, variance - found_variance, mean - u_mean, variance - u_variance])

    def _mixture(self, p: ChainParams) -> Scalar:
        times = chain_grid(time_domain(p))[:3]
        direct = self._joint(MainChain(p), times)
        return mixture_joint_law(p, times, self.config.max_atoms).total_variation(direct)

    def _endpoint_pairs(self, p: ChainParams, left, right):
        sc = stitch_constants(p)
        return [(sc.phi(s), sc.phi_prime(u)) for s, u in product(left[:2], right[:2])]

    def _theta_posteriors(self, p: ChainParams, s, u) -> Dict[tuple, Dict[int, Scalar]]:
        rows: Dict[tuple, Dict[int, Scalar]] = defaultdict(dict)
        for (k, m_state, n_state), mass in theta_endpoint_joint(p, s, u).items():
            rows[(m_state, n_state)][k] = mass
        posteriors = {}
        for condition, row in rows.items():
            total = sum(row.values())
            posteriors[condition] = {k: mass / total for k, mass in row.items()}
        return posteriors

    def _theta_conditional_law(self, p: ChainParams, left, right) -> Scalar:
        residuals = []
        for s, u in self._endpoint_pairs(p, left, right):
            for (m_state, n_state), found in self._theta_posteriors(p, s, u).items():
                residuals.append(_law_gap(found, theta_conditional_law(p, s, u, m_state, n_state)))
        return _max_abs(residuals)

    def _theta_conditional_moments(self, p: ChainParams, left, right) -> Scalar:
        residuals = []
        for s, u in self._endpoint_pairs(p, left, right):
            for (m_state, n_state), found in self._theta_posteriors(p, s, u).items():
                mean, variance = DiscreteLaw.from_dict(found).moments(lambda k: k)
                expected = theta_conditional_moments(
                    p.A, s, u, y_value(m_state, p.A, s), y_value(n_state, p.A, u, dual=True)
                )
                residuals += [expected[0] - mean, expected[1] - variance]
        return _max_abs(residuals)

    def _mean_square_gap(self, p: ChainParams) -> Scalar:
        return _max_abs(mean_square_gap(p, s) - (1 - s) for s in _rationals(self.config.mean_square_times))

    def _theta_limit(self, p: ChainParams) -> float:
        point = ParamPoint(A=str(p.A), B=str(p.B), C=str(p.C), N=p.N)
        pf = self._chain_params(point, Mode.FLOAT)
        return univariate_law(pf, self.config.limit_theta_time).total_variation(theta_law(pf))

    def _growth(self, p: ChainParams) -> float:
        return max(
            abs(value)
            for K in self.config.k_values
            for value in limit_growth(K, p.A, p.B, self.config.limit_growth_time)
        )

    def _extension(self, p: ChainParams, grid) -> int:
        """0 when the sub-interval checks and the full-grid check agree and both hold."""
        sp = stitch_constants(p).standardization.scaled().with_gamma_offset(self.gamma_offset)
        outcome = extension_check(p, grid, sp)
        return 0 if outcome.consistent and outcome.full_ok else 1

    # -- Monte Carlo -----------------------------------------------------------

    def monte_carlo_tasks(self, seed: int) -> List[CheckTask]:
        cfg = self.config
        grid = _rationals(cfg.mc_grid)
        tasks = []
        for p in self._points(cfg.case1_points, Case.CASE1):
            label = p.label()
            tasks += [
                CheckTask(
                    "montecarlo.marginal", "marginal", label, CheckMode.MONTE_CARLO, cfg.mc_sigmas,
                    partial(self._mc_marginal, p, grid, seed),
                ),
                CheckTask(
                    "montecarlo.stitched-covariance", "stitched-covariance", label, CheckMode.MONTE_CARLO,
                    cfg.mc_sigmas, partial(self._mc_stitched_covariance, p, grid, seed),
                ),
                CheckTask(
                    "montecarlo.determinism", "determinism", label, CheckMode.MONTE_CARLO, 0.0,
                    partial(self._mc_determinism, p, grid, seed),
                ),
            ]
        return tasks

    def _mc_marginal(self, p: ChainParams, grid, seed: int) -> float:
        """Largest binomial z-score of an empirical state frequency."""
        chain = MainChain(p)
        n = self.config.mc_paths
        paths = sample_paths(chain, grid, seed, n)
        worst = 0.0
        for i, t in enumerate(grid):
            counts = np.bincount(paths[:, i], minlength=p.N + 1)
            for state, weight in chain.univariate_law(t):
                prob, freq = float(weight), counts[state] / n
                spread = math.sqrt(prob * (1 - prob) / n)
                if spread == 0:
                    score = 0.0 if freq == prob else math.inf
                else:
                    score = abs(freq - prob) / spread
                worst = max(worst, score)
        return worst

    def _mc_stitched_covariance(self, p: ChainParams, grid, seed: int) -> float:
        """Largest z-score of an empirical E(Z_s Z_u) against min(s, u)."""
        n = self.config.mc_paths
        values = stitched_z_matrix(sample_stitched_paths(p, grid, seed, n), stitch_constants(p))
        worst = 0.0
        for i in range(len(grid)):
            for j in range(i, len(grid)):
                products = values[:, i] * values[:, j]
                error = products.std(ddof=1) / math.sqrt(n)
                gap = abs(products.mean() - float(min(grid[i], grid[j])))
                worst = max(worst, gap / error if error > 0 else (0.0 if gap == 0 else math.inf))
        return worst

    def _mc_determinism(self, p: ChainParams, grid, seed: int) -> int:
        chain = MainChain(p)
        first = sample_paths(chain, grid, seed, DETERMINISM_PATHS)
        second = sample_paths(chain, grid, seed, DETERMINISM_PATHS)
        stitched_first = sample_stitched_paths(p, grid, seed, DETERMINISM_PATHS)
        stitched_second = sample_stitched_paths(p, grid, seed, DETERMINISM_PATHS)
        same = np.array_equal(first, second) and stitched_first == stitched_second
        return 0 if same else 1
