import asyncio
import logging
from typing import Annotated, List

import uvicorn
from dotenv import load_dotenv
from fastapi import Depends, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from harness_lab import __version__
from harness_lab.helpers.helper import LOG_FORMAT, cors_origins, log_level
from harness_lab.models.errors import HarnessLabError
from harness_lab.models.model import CliConfig, HarnessSummary, LawRow, TrajectoryRow
from harness_lab.routers import verification
from harness_lab.services.lab import LabService

load_dotenv()


# Initialize Logger
logging.basicConfig(level=log_level(), format=LOG_FORMAT)
logger = logging.getLogger(__name__)


app = FastAPI(title="Harness Lab API", version=__version__)

# Include routers
app.include_router(verification.router)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=cors_origins(),
    allow_credentials=False,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


async def _run(fn, config: CliConfig):
    try:
        return await asyncio.to_thread(fn, config)
    except HarnessLabError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.exception(f"{fn.__name__} failed")
        raise HTTPException(status_code=500, detail=f"{fn.__name__} failed: {e}")


@app.post("/law/", response_model=List[LawRow])
async def law(config: CliConfig, lab_service: Annotated[LabService, Depends()]):
    """Univariate law of the chain at time t."""
    return await _run(lab_service.law_rows, config)


@app.post("/params/", response_model=HarnessSummary)
async def params(config: CliConfig, lab_service: Annotated[LabService, Depends()]):
    """Quadratic-harness parameters of the standardized chain."""
    return await _run(lab_service.harness_summary, config)


@app.post("/simulate/", response_model=List[TrajectoryRow])
async def simulate(config: CliConfig, lab_service: Annotated[LabService, Depends()]):
    """Seeded trajectories on the configured grid."""
    return await _run(lab_service.simulate_rows, config)


if __name__ == "__main__":
    logger.info("Starting Harness Lab API server")
    uvicorn.run(app, host="0.0.0.0", port=8000)
