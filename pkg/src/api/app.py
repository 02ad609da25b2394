from contextlib import asynccontextmanager
from fastapi import FastAPI, HTTPException
from typing import Any, Dict, Optional
from loguru import logger
from ..config import get_settings
from ..utils.logging import setup_logging
from ..bench.commands import cmd_rates, cmd_run, cmd_verify
from ..bench.experiment import ExperimentConfig
from ..bench.traces import read_metadata, trace_paths
from ..utils.errors import ConfigError, InfeasibleStepsizeError, SplitBenchError
import json
import os
from datetime import datetime

settings = get_settings()


@asynccontextmanager
async def lifespan(app: FastAPI):
    setup_logging()
    yield


app = FastAPI(title="splitbench", lifespan=lifespan)


def _save_result(kind: str, results: Dict[str, Any], out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    result_file = os.path.join(out_dir, f"{kind}_result_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json")
    with open(result_file, "w") as f:
        json.dump(results, f, indent=2)
    return result_file


def _http_error(action: str, e: Exception) -> HTTPException:
    logger.error(f"Error running {action}: {e}")
    if isinstance(e, (ConfigError, InfeasibleStepsizeError)):
        return HTTPException(status_code=422, detail=str(e))
    return HTTPException(status_code=500, detail=str(e))


@app.post("/run")
def run_experiment(config: ExperimentConfig, out_dir: Optional[str] = None):
    """Run the configured algorithms and write their traces"""
    try:
        logger.info(f"Starting run with config: {config.model_dump(mode='json')}")
        paths = cmd_run(config, out_dir)
        traces = []
        for path in paths:
            _, json_path = trace_paths(path.parent, path.stem)
            traces.append({"csv": str(path), "metadata": read_metadata(json_path).model_dump(mode="json")})
        return {
            "timestamp": datetime.now().isoformat(),
            "config": config.model_dump(mode="json"),
            "traces": traces,
        }
    except SplitBenchError as e:
        raise _http_error("run", e)


@app.post("/verify")
def verify_experiment(config: ExperimentConfig):
    """Check every configured algorithm against its contraction envelope"""
    try:
        summary = cmd_verify(config)
        results = {
            "timestamp": datetime.now().isoformat(),
            "config": config.model_dump(mode="json"),
            "summary": summary.as_dict(),
            "table": summary.table(),
        }
        results["result_file"] = _save_result("verify", results, config.output.path)
        return results
    except SplitBenchError as e:
        raise _http_error("verify", e)


@app.post("/rates")
def rate_sweep(config: ExperimentConfig):
    """Sweep conditioning or lambda_min and compare measured and predicted iteration counts"""
    try:
        report = cmd_rates(config)
        return {
            "timestamp": datetime.now().isoformat(),
            "config": config.model_dump(mode="json"),
            "report": report.as_dict(),
            "table": report.table(),
        }
    except SplitBenchError as e:
        raise _http_error("rate sweep", e)


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host=settings.API_HOST, port=settings.API_PORT)
