import logging
from typing import Any, Dict, Optional

from fastapi import APIRouter, HTTPException, Query

from app.models import (
    Command, GridSpec, OverlapRequest, OverlapResponse, QFunctionRequest, StateRequest, StateResponse,
    TableResponse, VerificationSettings, VerifyResponse, WavefunctionRequest, WavefunctionResponse
)
from app.services.command_service import command_service
from app.services.verification_service import verification_service
from app.utils import finite_or_none

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api/eigen", tags=["eigenstates"])


def _run(config) -> Dict[str, Any]:
    try:
        return finite_or_none(command_service.run(config))
    except ValueError as e:
        logger.error(f"Invalid {config.command.value} request: {str(e)}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Unexpected error in {config.command.value}: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Internal server error while running {config.command.value}")


def _config(request, command: Command, **extra):
    try:
        return request.to_run_config(command, **extra)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.get("/health")
async def health_check():
    """Health check for the eigenstate service"""
    return {
        "status": "healthy",
        "service": "Squeeze-pair eigenstates",
        "models": {"f1": "a² + βa†²", "f2": "ab + βa†b†"},
        "features": [
            "Eigenstate coefficient tables",
            "Squeezed-vacuum and Caves-Schumaker overlaps",
            "Coherent-state overlaps and Q-functions",
            "Position wavefunctions",
            "Acceptance suite"
        ]
    }


@router.post("/state", response_model=StateResponse)
def build_state(request: StateRequest):
    """
    Build an eigenstate on a truncated Fock space.

    Returns the coefficient table with the gauge, the truncation and the
    interior residual of the eigenvalue equation.
    """
    return _run(_config(request, Command.STATE))


@router.post("/overlap", response_model=OverlapResponse, response_model_exclude_unset=True)
def overlap(request: OverlapRequest):
    """Closed-form overlap with a squeezed vacuum (Caves-Schumaker state for f2), coherent or number state"""
    return _run(_config(
        request,
        Command.OVERLAP,
        kind=request.kind,
        point=complex(request.point_re, request.point_im),
        delta=complex(request.delta_re, request.delta_im),
        n=request.n
    ))


@router.post("/qfunc", response_model=TableResponse)
def q_function(request: QFunctionRequest):
    """Q-function on a square grid; for f2 the grid runs over γ at fixed δ"""
    try:
        grid = GridSpec(minimum=request.grid_min, maximum=request.grid_max, steps=request.grid_steps)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return _run(_config(request, Command.QFUNC, grid=grid, delta=complex(request.delta_re, request.delta_im)))


@router.post("/wavefunction", response_model=WavefunctionResponse)
def wavefunction(request: WavefunctionRequest):
    """Ratio f(x)/f(x0) of the single-mode position wavefunction"""
    try:
        grid = GridSpec(minimum=request.x_min, maximum=request.x_max, steps=request.x_steps)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return _run(_config(request, Command.WAVEFUNCTION, grid=grid, x0=request.x0))


@router.get("/verify", response_model=VerifyResponse)
def verify(
    single_dim: Optional[int] = Query(None, ge=8, le=1024, description="Single-mode dimension"),
    single_guard: Optional[int] = Query(None, ge=0),
    pair_dim: Optional[int] = Query(None, ge=8, le=64, description="Two-mode dimension per mode"),
    pair_guard: Optional[int] = Query(None, ge=0),
    wave_dim: Optional[int] = Query(None, ge=8, le=1024),
    transform_dim: Optional[int] = Query(None, ge=8, le=64),
    expect_fail: bool = Query(False, description="Run the wrong-sector negative control")
):
    """Run the acceptance suite; unset sizes use the configured defaults"""
    overrides = {
        key: value for key, value in {
            "single_dim": single_dim, "single_guard": single_guard, "pair_dim": pair_dim,
            "pair_guard": pair_guard, "wave_dim": wave_dim, "transform_dim": transform_dim
        }.items() if value is not None
    }
    try:
        settings = VerificationSettings(**{**verification_service.default_settings.model_dump(), **overrides})
        if expect_fail:
            report = verification_service.run_negative_control(settings)
        else:
            report = verification_service.run(settings)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return finite_or_none({"command": Command.VERIFY.value, "expect_fail": expect_fail, **report.model_dump(mode="json")})
