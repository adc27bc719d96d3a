"""
FastAPI Main Application - Mixed-ADC hybrid DOA toolkit
"""
import logging
import os
from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from config import settings
from routes import analysis

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan handler for startup and shutdown"""
    logging.basicConfig(level=settings.log_level)
    os.makedirs(settings.output_dir, exist_ok=True)
    logger.info("%s %s ready, docs at /docs", settings.app_name, settings.app_version)

    yield

    logger.info("shutting down %s", settings.app_name)


app = FastAPI(
    title=settings.app_name,
    description="""
    DOA estimation and performance analysis for sub-connected hybrid arrays with mixed-resolution ADCs

    ## Features
    - Closed-form CRLB and performance loss with a numerical Fisher oracle
    - Receiver power and energy efficiency
    - Monte Carlo RMSE of the single-time-block root-MUSIC estimator
    - Analog beam power profiles
    """,
    version=settings.app_version,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(analysis.router, prefix="/api/analysis", tags=["DOA Analysis"])


@app.get("/")
async def root():
    """Root endpoint"""
    return {
        "message": settings.app_name,
        "status": "running",
        "docs": "/docs",
        "version": settings.app_version,
    }


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy"}


if __name__ == "__main__":
    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        reload=True
    )
