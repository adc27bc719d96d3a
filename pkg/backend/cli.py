"""
Batch CLI - closed-form sweeps, Monte Carlo runs and oracle validation to CSV

Usage:
    python cli.py ploss --ma 4 --sweep bits=1:10:1 --snr-db 0
    python cli.py mc --m 16 --ma 2 --kappa 1 --sweep snr_db=-10:20:5 --trials 2000
    python cli.py validate
    python cli.py ee --config data/configs/energy_bits.env
"""
import argparse
import asyncio
import json
import logging
import math
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from config import settings
from models.experiment import ExperimentConfig
from services.errors import ConfigurationError, CoverageError, InvalidDirectionError
from services.experiment_service import ExperimentService

logger = logging.getLogger("cli")

EXIT_OK, EXIT_FAILED, EXIT_BAD_CONFIG = 0, 1, 2

# flag/config-file key -> ExperimentConfig field
FIELDS = {
    "m": "m_total",
    "ma": "m_per",
    "kappa": "kappa",
    "bits": "bits_low",
    "bits_high": "bits_high",
    "snr_db": "snr_db",
    "theta0_deg": "theta0_deg",
    "snapshots": "snapshots",
    "trials": "trials",
    "seed": "seed",
    "out": "output",
    "literal_ambiguity": "literal_ambiguity",
    "workers": "workers",
    "ab": "ab_mode",
}

TRUE_WORDS = {"1", "true", "yes", "on"}


def parse_sweep(text: str) -> Dict[str, Any]:
    """'axis=start:stop:step' (stop inclusive) or 'axis=v1,v2,...'"""
    axis, sep, spec = text.partition("=")
    if not sep or not axis.strip() or not spec.strip():
        raise ConfigurationError(f"sweep '{text}' is not axis=start:stop:step or axis=v1,v2,...")
    try:
        numbers = [float(part) for part in spec.replace(":", ",").split(",")]
    except ValueError as e:
        raise ConfigurationError(f"sweep '{text}' has a non-numeric value") from e
    if ":" not in spec:
        return {"sweep_axis": axis.strip(), "sweep_values": numbers}
    if len(numbers) != 3:
        raise ConfigurationError(f"sweep '{text}' needs start:stop:step")
    start, stop, step = numbers
    if step == 0 or (stop - start) / step < 0:
        raise ConfigurationError(f"sweep '{text}' never reaches its stop value")
    count = math.floor((stop - start) / step + 1e-9) + 1
    values = [round(start + i * step, 12) for i in range(count)]
    return {"sweep_axis": axis.strip(), "sweep_values": values}


def _file_values(path: str) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    if not os.path.isfile(path):
        raise ConfigurationError(f"config file {path} does not exist")
    try:
        raw = dotenv_values(path)
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    for key, value in raw.items():
        key = key.strip().lower().replace("-", "_")
        if value is None:
            continue
        if key == "sweep":
            values.update(parse_sweep(value))
        elif key == "no_align_signs":
            values["align_signs"] = value.strip().lower() not in TRUE_WORDS
        elif key == "no_profile_match":
            values["profile_match"] = value.strip().lower() not in TRUE_WORDS
        elif key in ("literal_ambiguity", "literal_eq27"):
            values["literal_ambiguity"] = value.strip().lower() in TRUE_WORDS
        elif key in FIELDS:
            values[FIELDS[key]] = value
        else:
            raise ConfigurationError(f"unknown key '{key}' in {path}")
    return values


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Settings defaults, then the config file, then explicit flags"""
    values: Dict[str, Any] = {"trials": settings.default_trials}
    if args.config:
        values.update(_file_values(args.config))
    for key, field in FIELDS.items():
        flag = getattr(args, key, None)
        if flag is not None and flag is not False:
            values[field] = flag
    if args.no_align_signs:
        values["align_signs"] = False
    if args.no_profile_match:
        values["profile_match"] = False
    if args.sweep:
        values.update(parse_sweep(args.sweep))
    return ExperimentConfig(**values)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="total antennas M")
    common.add_argument("--ma", type=int, help="antennas per subarray M_a")
    common.add_argument("--kappa", type=float, help="proportion of high-resolution chains")
    common.add_argument("--bits", type=int, help="low-resolution ADC bits b")
    common.add_argument("--bits-high", type=int, help="high-resolution ADC bits")
    common.add_argument("--snr-db", type=float, help="SNR in dB")
    common.add_argument("--theta0-deg", type=float, help="source direction in degrees")
    common.add_argument("--snapshots", type=int, help="snapshots N")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--sweep", help="axis=start:stop:step or axis=v1,v2,...")
    common.add_argument("--config", help="key=value experiment file")
    common.add_argument("--out", help="output CSV path")
    common.add_argument("--workers", type=int, help="thread pool size")
    common.add_argument("--ab", choices=["all_ones", "coverage"], help="analog beamformer for oracle columns")
    common.add_argument("--literal-ambiguity", "--literal-eq27", dest="literal_ambiguity",
                        action="store_true", default=None,
                        help="pick the candidate farthest from the strongest beam")
    common.add_argument("--no-align-signs", action="store_true", help="skip residual sign alignment")
    common.add_argument("--no-profile-match", action="store_true",
                        help="resolve the ambiguity with the strongest beam only")

    parser = argparse.ArgumentParser(prog="doa", description="Mixed-ADC hybrid DOA toolkit")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("crlb", parents=[common], help="closed-form and oracle CRLB sweep")
    commands.add_parser("ploss", parents=[common], help="performance-loss sweep")
    commands.add_parser("ee", parents=[common], help="power and energy-efficiency sweep")
    commands.add_parser("mc", parents=[common], help="Monte Carlo RMSE of the estimator")
    commands.add_parser("beams", parents=[common], help="per-chain beam power profile")
    validate = commands.add_parser("validate", parents=[common], help="closed form against the oracle")
    validate.add_argument("--grid", choices=["acceptance", "point"], default="acceptance")
    return parser


async def run(args: argparse.Namespace, config: ExperimentConfig) -> int:
    service = ExperimentService(workers=config.workers)
    command = args.command

    if command == "validate":
        report = await service.validate_oracle(config, grid=args.grid)
        print(json.dumps(report.model_dump(mode="json", exclude={"failing_points"}), indent=2))
        return EXIT_OK if report.passed else EXIT_FAILED

    problems: List[str] = []
    if command == "mc":
        table = await service.monte_carlo_rmse(config)
        problems = service.check_run(table, config)
    elif command == "crlb":
        table = await service.sweep_closed_form(config, include_oracle=True)
    elif command == "ploss":
        table = await service.sweep_closed_form(config)
    elif command == "ee":
        table = await service.sweep_energy(config)
    else:
        table = await service.sweep_beam_power(config)

    path = await service.write_csv(table, command, config)
    print(path)
    return EXIT_FAILED if problems else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        return asyncio.run(run(args, config))
    except (ValidationError, ConfigurationError, CoverageError, InvalidDirectionError) as e:
        logger.error("bad configuration: %s", e)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
