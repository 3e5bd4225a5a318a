"""
LabService: the operations behind the CLI and the HTTP routes.

Each method takes a validated Pydantic config and returns Pydantic rows or
reports; rendering is left to the caller.
"""

import logging
from typing import List, Optional

from harness_lab.helpers.helper import format_scalar
from harness_lab.models.errors import DegenerateChain, InvalidDescriptor
from harness_lab.models.model import (
    CliConfig,
    HarnessSummary,
    LawRow,
    Suite,
    TrajectoryRow,
    VerificationConfig,
    VerificationReport,
)
from harness_lab.services.harness import (
    HarnessParams,
    Standardization,
    case_harness_params,
    k_chain_harness_params,
    k_chain_standardization,
    main_standardization,
)
from harness_lab.services.markov import (
    ChainParams,
    GridSampler,
    KChain,
    MainChain,
    MarkovChain,
    path_rng,
)
from harness_lab.services.scalar import Scalar, parse_scalar
from harness_lab.services.stitching import sample_stitched_paths, stitch_constants
from harness_lab.services.verification import VerificationService

logger = logging.getLogger(__name__)


class LabService:
    def chain_params(self, config: CliConfig) -> ChainParams:
        return ChainParams.create(config.A, config.B, config.C, config.N, mode=config.mode)

    def grid(self, config: CliConfig) -> List[Scalar]:
        return [parse_scalar(t, config.mode) for t in config.grid]

    def chain(self, config: CliConfig) -> MarkovChain:
        p = self.chain_params(config)
        if config.k_chain is not None:
            return KChain.from_params(config.k_chain, p)
        return MainChain(p)

    def law_rows(self, config: CliConfig) -> List[LawRow]:
        """Univariate law at time t as (state, weight, y-value) rows."""
        chain = self.chain(config)
        t = parse_scalar(config.t, config.mode)
        law = chain.univariate_law(t)
        logger.info(f"law of {chain!r} at t={t}: {len(law)} states")
        return [
            LawRow(state=state, weight=format_scalar(weight), y_value=format_scalar(chain.y_value(state, t)))
            for state, weight in law
        ]

    def harness_params(self, config: CliConfig) -> HarnessParams:
        p = self.chain_params(config)
        if config.k_chain is not None:
            return k_chain_harness_params(config.k_chain, p.A, p.B)
        return case_harness_params(p)

    def harness_summary(self, config: CliConfig) -> HarnessSummary:
        params = self.harness_params(config)
        case = "K-chain" if config.k_chain is not None else self.chain_params(config).case.value
        return HarnessSummary(
            case=case,
            eta=format_scalar(params.eta),
            theta=format_scalar(params.theta),
            sigma=format_scalar(params.sigma),
            tau=format_scalar(params.tau),
            gamma=format_scalar(params.gamma),
            floats=params.floats(),
            domain=str(params.domain),
            gamma_identity=params.gamma_identity(),
        )

    def _standardization(self, config: CliConfig) -> Optional[Standardization]:
        p = self.chain_params(config)
        try:
            if config.k_chain is not None:
                return k_chain_standardization(config.k_chain, p.A, p.B)
            return main_standardization(p)
        except (DegenerateChain, InvalidDescriptor) as e:
            logger.warning(f"no standardization for {p.label()}: {e}")
            return None

    def simulate_rows(self, config: CliConfig) -> List[TrajectoryRow]:
        """Trajectories on the grid; chain times, or stitched harness times with ``stitched``."""
        if config.stitched:
            return self._stitched_rows(config)
        chain = self.chain(config)
        st = self._standardization(config)
        sampler = GridSampler(chain, self.grid(config))
        rows = []
        for index in range(config.paths):
            states = sampler.draw(path_rng(config.seed, index))
            for t, state in zip(sampler.times, states):
                y = chain.y_value(state, t)
                z = ""
                if st is not None:
                    h = st.harness_time(t)
                    z = format_scalar(float(st.w_value(h, y)) / float(st.scale))
                rows.append(TrajectoryRow(
                    path_id=index, time=format_scalar(t), state=state, y_value=format_scalar(y), z_value=z
                ))
        logger.info(f"simulated {config.paths} path(s) of {chain!r} with seed {config.seed}")
        return rows

    def _stitched_rows(self, config: CliConfig) -> List[TrajectoryRow]:
        p = self.chain_params(config)
        scale = float(stitch_constants(p).v)
        rows = []
        for path in sample_stitched_paths(p, self.grid(config), config.seed, config.paths):
            for t, state, y, w in zip(path.times, path.states, path.y_values, path.w_values):
                rows.append(TrajectoryRow(
                    path_id=path.index,
                    time=format_scalar(t),
                    state=state,
                    y_value="" if y is None else format_scalar(y),
                    z_value=format_scalar(float(w) / scale),
                ))
        return rows

    def run_suites(
        self, config: VerificationConfig, suite: Suite = Suite.ALL, seed: Optional[int] = None
    ) -> VerificationReport:
        return VerificationService(config).run(suite, seed)
