"""
Analysis routes - bounds, performance loss, energy efficiency, validation and Monte Carlo runs
"""
import math
from typing import Any, Dict, List

import pandas as pd
from fastapi import APIRouter, HTTPException

from config import settings
from models.experiment import ExperimentConfig, ValidationRequest
from services.errors import DoaError
from services.experiment_service import ExperimentService

router = APIRouter()

experiment_service = ExperimentService()


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _rows(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """Records with non-finite numbers as null"""
    return [{k: _finite(v) for k, v in row.items()} for row in table.to_dict(orient="records")]


async def _respond(kind: str, coro) -> Dict[str, Any]:
    try:
        table = await coro
    except (DoaError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"{kind} run failed: {str(e)}")
    return {"kind": kind, "rows": _rows(table)}


@router.post("/crlb")
async def crlb_sweep(config: ExperimentConfig):
    """Closed-form CRLB with oracle columns for the requested analog beamformer"""
    return await _respond("crlb", experiment_service.sweep_closed_form(config, include_oracle=True))


@router.post("/ploss")
async def performance_loss_sweep(config: ExperimentConfig):
    """Performance loss against the fully digital, high-resolution array"""
    return await _respond("ploss", experiment_service.sweep_closed_form(config))


@router.post("/energy")
async def energy_sweep(config: ExperimentConfig):
    """Receiver power, CRLB and energy efficiency"""
    return await _respond("ee", experiment_service.sweep_energy(config))


@router.post("/beams")
async def beam_power(config: ExperimentConfig):
    return await _respond("beams", experiment_service.sweep_beam_power(config))


@router.post("/monte-carlo")
async def monte_carlo(config: ExperimentConfig):
    """Estimator RMSE; the trial count is capped for interactive use"""
    if config.trials > settings.api_max_trials:
        raise HTTPException(
            status_code=400,
            detail=f"trials={config.trials} exceeds the limit of {settings.api_max_trials}",
        )
    response = await _respond("mc", experiment_service.monte_carlo_rmse(config))
    table = pd.DataFrame(response["rows"])
    response["problems"] = experiment_service.check_run(table, config) if len(table) else []
    return response


@router.post("/validate")
async def validate(request: ValidationRequest):
    """Closed-form Fisher information against the dense oracle"""
    try:
        report = await experiment_service.validate_oracle(request.config, grid=request.grid)
    except (DoaError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"validation failed: {str(e)}")
    return {**report.model_dump(), "passed": report.passed}
