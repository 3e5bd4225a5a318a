import asyncio
import logging
from typing import Annotated, Optional

from fastapi import APIRouter, Depends, HTTPException

from harness_lab.models.errors import HarnessLabError
from harness_lab.models.model import Suite, VerificationConfig, VerificationReport
from harness_lab.services.lab import LabService

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/verify",
    tags=["verification"]
)


@router.post("/{suite}", response_model=VerificationReport)
async def run_suite(
    suite: Suite,
    lab_service: Annotated[LabService, Depends()],
    config: Optional[VerificationConfig] = None,
    seed: Optional[int] = None,
):
    """Run a verification suite; failed checks are reported in the body, not as errors."""
    config = config or VerificationConfig()
    logger.info(f"verification request: suite={suite.value}, seed={seed}")
    try:
        return await asyncio.to_thread(lab_service.run_suites, config, suite, seed)
    except HarnessLabError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.exception(f"verification of {suite.value} crashed")
        raise HTTPException(status_code=500, detail=f"verification failed: {e}")
