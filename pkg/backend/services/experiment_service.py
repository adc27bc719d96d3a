"""
Experiment Service - Monte Carlo runs, closed-form sweeps, oracle validation and CSV output
"""
import asyncio
import itertools
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from config import settings
from models.array import ArrayGeometry, BeamMode
from models.experiment import ExperimentConfig, SweepAxis, ValidationReport
from models.signal import SourceTruth
from .beamformer import beam_power_profile, design_coverage_ab, make_ab
from .crlb import (
    crlb_theta,
    fim_closed_form,
    fim_numerical_oracle,
    fisher_discrepancy,
    fisher_report,
    ideal_crlb,
    ideal_geometry,
    ideal_profile,
)
from .energy import energy_efficiency, total_power
from .errors import ConfigurationError, DoaError
from .estimator import stb_root_music
from .quantizer import adc_profile
from .synth import generate_snapshots

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"

ACCEPTANCE_GRID = {
    "m_total": [16, 32, 128],
    "m_per": [1, 2, 4],
    "kappa": [0.0, 0.25, 0.5, 1.0],
    "bits_low": [1, 2, 3, 4, 5],
    "gamma": [0.1, 1.0, 10.0],
    "theta0_deg": [-60.0, -30.0, 0.0, 15.0, 45.0, 60.0],
}


def _profile(cfg: ExperimentConfig):
    return adc_profile(cfg.m_sub, cfg.kappa, cfg.bits_low, cfg.bits_high)


def _point_columns(config: ExperimentConfig, value: Optional[float], cfg: ExperimentConfig) -> Dict[str, Any]:
    row = {
        "axis": config.sweep_axis.value if config.sweep_axis else "",
        "axis_value": value,
    }
    row.update(cfg.flat())
    return row


def _validation_point(point: Dict[str, Any]) -> Dict[str, Any]:
    geom = ArrayGeometry.from_counts(point["m_total"], point["m_per"])
    profile = adc_profile(geom.m_sub, point["kappa"], point["bits_low"])
    gamma, theta = point["gamma"], math.radians(point["theta0_deg"])
    closed = fim_closed_form(geom, profile, gamma, theta)
    oracle = fim_numerical_oracle(geom, make_ab(geom, BeamMode.ALL_ONES), profile, gamma, theta)
    ideal = fim_closed_form(ideal_geometry(geom), ideal_profile(geom, profile), gamma, theta)
    discrepancy = fisher_discrepancy(closed, oracle, ideal, settings.validation_floor)
    if point["m_per"] == 1 and point["kappa"] == 1.0:
        snapshots = point.get("snapshots", 1)
        bound, _ = crlb_theta(closed, snapshots)
        classical = ideal_crlb(geom, gamma, theta, snapshots)
        discrepancy = max(discrepancy, abs(bound - classical) / classical)
    return {**point, "discrepancy": discrepancy}


class ExperimentService:
    """
    Runs experiments on a thread pool.

    Every trial draws from its own (seed, axis index, trial index) substream and rows
    are assembled in axis order, so results do not depend on the worker count.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or settings.workers

    async def _map(self, fn: Callable, items: Sequence) -> List:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return await asyncio.gather(*(loop.run_in_executor(pool, fn, item) for item in items))

    async def monte_carlo_rmse(self, config: ExperimentConfig) -> pd.DataFrame:
        """
        RMSE in degrees of the estimator at every sweep point.

        Uses the coverage analog beamformer. Trials that raise a DoaError are
        excluded and counted in ``failed_trials``.
        """
        points = config.points()
        contexts = []
        for idx, value, cfg in points:
            geom = cfg.geometry()
            contexts.append((geom, design_coverage_ab(geom), _profile(cfg), cfg))
        logger.info("Monte Carlo run: %d points x %d trials", len(points), config.trials)

        def trial(item):
            idx, t = item
            geom, ab, profile, cfg = contexts[idx]
            truth = SourceTruth(theta0=cfg.theta0, gamma=cfg.gamma, snapshots=cfg.snapshots)
            try:
                block = generate_snapshots(geom, ab, profile, truth, cfg.seed, stream=(idx, t))
                estimate = stb_root_music(
                    block, geom, ab,
                    literal_ambiguity=cfg.literal_ambiguity,
                    align_signs=cfg.align_signs,
                    profile_match=cfg.profile_match,
                    adc=profile,
                )
            except DoaError as e:
                return None, f"{type(e).__name__}: {e}"
            return math.degrees(estimate - cfg.theta0), None

        items = [(idx, t) for idx in range(len(points)) for t in range(config.trials)]
        outcomes = await self._map(trial, items)

        rows = []
        for idx, value, cfg in points:
            chunk = outcomes[idx * config.trials:(idx + 1) * config.trials]
            errors = [err for err, _ in chunk if err is not None]
            for t, (_, reason) in enumerate(chunk):
                if reason is not None:
                    logger.warning("excluded trial %d at point %d: %s", t, idx, reason)
            geom, ab, profile, _ = contexts[idx]
            report = fisher_report(geom, profile, cfg.gamma, cfg.theta0, cfg.snapshots, ab=ab)
            row = _point_columns(config, value, cfg)
            row.update({
                "ab_mode": BeamMode.COVERAGE.value,
                "rmse_deg": math.sqrt(np.mean(np.square(errors))) if errors else math.nan,
                "failed_trials": len(chunk) - len(errors),
                "crlb_deg2": report.crlb_deg2,
                "crlb_joint_deg2": report.crlb_joint_deg2,
            })
            rows.append(row)
        logger.info("Monte Carlo run finished")
        return pd.DataFrame(rows)

    def check_run(self, table: pd.DataFrame, config: ExperimentConfig) -> List[str]:
        """Failed-trial cap and RMSE monotonicity in SNR; returns the problems found"""
        problems = []
        cap = settings.max_failed_fraction * config.trials
        for _, row in table[table["failed_trials"] > cap].iterrows():
            problems.append(f"{row['failed_trials']} failed trials at {row['axis']}={row['axis_value']}")
        if config.sweep_axis is SweepAxis.SNR_DB and len(table) > 1:
            ordered = table.sort_values("snr_db")
            rmse = ordered["rmse_deg"].to_numpy()
            snr = ordered["snr_db"].to_numpy()
            for i in range(1, rmse.size):
                if rmse[i] > rmse[i - 1] * (1 + settings.monotone_tolerance):
                    problems.append(f"RMSE rises from {rmse[i - 1]:.4g} to {rmse[i]:.4g} deg at {snr[i]} dB")
        for problem in problems:
            logger.error(problem)
        return problems

    async def sweep_closed_form(self, config: ExperimentConfig, include_oracle: bool = False) -> pd.DataFrame:
        """eta_PL, bounds and Fisher entries per sweep point, optionally with oracle columns for config.ab_mode"""
        points = config.points()
        logger.info("closed-form sweep: %d points", len(points))

        def evaluate(point):
            _, value, cfg = point
            geom, profile = cfg.geometry(), _profile(cfg)
            report = fisher_report(geom, profile, cfg.gamma, cfg.theta0, cfg.snapshots)
            row = _point_columns(config, value, cfg)
            row.update({
                "eta_pl": report.eta_pl,
                "crlb_deg2": report.crlb_deg2,
                "crlb_joint_deg2": report.crlb_joint_deg2,
                "f_gamma_gamma": report.f_gamma_gamma,
                "f_gamma_theta": report.f_gamma_theta,
                "f_theta_theta": report.f_theta_theta,
            })
            if include_oracle:
                oracle = fisher_report(
                    geom, profile, cfg.gamma, cfg.theta0, cfg.snapshots,
                    ab=make_ab(geom, cfg.ab_mode), use_oracle=True,
                )
                row.update({
                    "oracle_f_gamma_gamma": oracle.f_gamma_gamma,
                    "oracle_f_gamma_theta": oracle.f_gamma_theta,
                    "oracle_f_theta_theta": oracle.f_theta_theta,
                    "oracle_crlb_deg2": oracle.crlb_deg2,
                    "oracle_crlb_joint_deg2": oracle.crlb_joint_deg2,
                })
            if math.isinf(report.eta_pl):
                logger.warning("unbounded variance at %s=%s", row["axis"] or "point", value)
            return row

        return pd.DataFrame(await self._map(evaluate, points))

    async def sweep_energy(self, config: ExperimentConfig) -> pd.DataFrame:
        """
        P_t, CRLB and eta_EE per sweep point.

        The CRLB is the all-ones closed form unless config.ab_mode selects the coverage
        beamformer, which uses the oracle. ``ab_mode`` records the one used.
        """
        points = config.points()
        logger.info("energy sweep: %d points", len(points))

        def evaluate(point):
            _, value, cfg = point
            geom, profile = cfg.geometry(), _profile(cfg)
            ab = make_ab(geom, cfg.ab_mode)
            report = fisher_report(geom, profile, cfg.gamma, cfg.theta0, cfg.snapshots, ab=ab)
            budget = total_power(geom, profile)
            row = _point_columns(config, value, cfg)
            row.update({
                "m_high": profile.m_high,
                "m_low": profile.m_low,
                "chi": budget.chi,
                "p_total_w": budget.p_total,
                **{f"p_{name}_w": watts for name, watts in budget.breakdown.items()},
                "crlb_deg2": report.crlb_deg2,
                "eta_ee": energy_efficiency(report.crlb_deg2, budget.p_total),
            })
            return row

        return pd.DataFrame(await self._map(evaluate, points))

    async def sweep_beam_power(self, config: ExperimentConfig, thetas_deg: Optional[Iterable[float]] = None) -> pd.DataFrame:
        """Per-chain gain |v_ms^H a(theta)|^2 over a direction grid, one row per direction"""
        if config.sweep_axis is not None:
            raise ConfigurationError("the beam power profile does not take a sweep")
        geom = config.geometry()
        ab = make_ab(geom, config.ab_mode)
        if thetas_deg is None:
            thetas_deg = np.arange(-89.5, 90.0, 0.5)
        thetas_deg = np.asarray(list(thetas_deg), dtype=float)
        gains = beam_power_profile(geom, ab, np.radians(thetas_deg))
        table = pd.DataFrame(gains, columns=[f"chain_{ms + 1}" for ms in range(geom.m_sub)])
        table.insert(0, "theta_deg", thetas_deg)
        table.insert(1, "ab_mode", ab.mode.value)
        return table

    async def validate_oracle(self, config: ExperimentConfig, grid: str = "acceptance") -> ValidationReport:
        """Worst closed-form/oracle Fisher discrepancy over the acceptance grid or the configured point"""
        if grid == "acceptance":
            keys = list(ACCEPTANCE_GRID)
            points = [dict(zip(keys, combo)) for combo in itertools.product(*ACCEPTANCE_GRID.values())]
        elif grid == "point":
            points = [{
                "m_total": cfg.m_total, "m_per": cfg.m_per, "kappa": cfg.kappa,
                "bits_low": cfg.bits_low, "gamma": cfg.gamma, "theta0_deg": cfg.theta0_deg,
                "snapshots": cfg.snapshots,
            } for _, _, cfg in config.points()]
        else:
            raise ConfigurationError(f"unknown validation grid '{grid}'")
        logger.info("validating closed form against the oracle at %d points", len(points))

        results = await self._map(_validation_point, points)
        tolerance = settings.validation_tolerance
        worst = max(results, key=lambda r: r["discrepancy"])
        failing = [r for r in results if r["discrepancy"] > tolerance]
        report = ValidationReport(
            points=len(results),
            tolerance=tolerance,
            max_discrepancy=worst["discrepancy"],
            worst_point=worst,
            failing_points=failing,
        )
        if report.passed:
            logger.info("validation passed, max discrepancy %.3g", report.max_discrepancy)
        else:
            logger.error("validation failed at %d points, worst %s", len(failing), worst)
        return report

    async def write_csv(self, table: pd.DataFrame, kind: str, config: ExperimentConfig, path: Optional[str] = None) -> str:
        """
        Write a result table behind a '#' header block.

        Only the 'generated' header line changes between reruns of the same config.
        The recorded ab_mode is the beamformer the rows were computed with.
        """
        path = path or config.output or os.path.join(settings.output_dir, f"{kind}.csv")
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        described = config.model_dump(mode="json", exclude={"workers", "output"})
        if "ab_mode" in table.columns and table["ab_mode"].nunique() == 1:
            described["ab_mode"] = table["ab_mode"].iloc[0]
        header = [
            f"# kind: {kind}",
            f"# config: {json.dumps(described, sort_keys=True)}",
            f"# seed: {config.seed}",
            f"# version: {settings.app_version}",
            f"# generated: {datetime.now(timezone.utc).isoformat()}",
        ]
        with open(path, "w", newline="") as f:
            f.write("\n".join(header) + "\n")
            table.to_csv(f, index=False, float_format=FLOAT_FORMAT)
        logger.info("wrote %d rows to %s", len(table), path)
        return path
