"""HTTP front-end: one endpoint per run, wrapping the command engine.

POST /run/{command} takes the graph text plus job parameters and returns the
full report document.  Structured failures come back as HTTP 400/422 with an
error kind the client maps to its exit codes ("syntax"/"config" -> 2,
"axiom" -> 1)."""

from __future__ import annotations

from typing import Any, Dict, List, Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .runner import COMMANDS, AxiomFailure, InputError, JobConfig, run

app = FastAPI(
    title="kgraph-kms",
    version=__version__,
    description="Validation, spectral theory and equilibrium-state suites for finite k-graph path-space shifts.",
)


class RunRequest(BaseModel):
    graph: str = Field(description="k-graph description in the text format")
    beta: Optional[float] = Field(default=None, gt=0)
    r: Optional[Union[str, List[float]]] = Field(
        default=None, description='positive vector of length k, or "preferred"'
    )
    levels: int = Field(default=2, ge=0, le=8)
    window: int = Field(default=1, ge=0, le=4)
    depth: int = Field(default=2, ge=0, le=6)
    tol: float = Field(default=1e-9, gt=0)
    samples: int = Field(default=40, ge=1, le=10000)
    seed: int = Field(default=0, ge=0)


class CheckModel(BaseModel):
    name: str
    passed: bool
    value: Any = None
    tolerance: Any = None
    params: Dict[str, Any] = {}


class RunResponse(BaseModel):
    command: str
    config: Dict[str, Any]
    graph: Dict[str, Any]
    checks: List[CheckModel]
    passed: bool


class ErrorBody(BaseModel):
    kind: str
    message: str


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/commands")
def commands() -> dict:
    return {"commands": list(COMMANDS)}


@app.post("/run/{command}", response_model=RunResponse)
def run_command(command: str, request: RunRequest) -> RunResponse:
    cfg = JobConfig(
        command=command,
        graph_text=request.graph,
        beta=request.beta,
        r=request.r,
        levels=request.levels,
        window=request.window,
        depth=request.depth,
        tol=request.tol,
        samples=request.samples,
        seed=request.seed,
    )
    try:
        report = run(cfg)
    except InputError as ex:
        raise HTTPException(status_code=400, detail={"kind": ex.kind, "message": str(ex)})
    except AxiomFailure as ex:
        raise HTTPException(status_code=400, detail={"kind": "axiom", "message": str(ex)})
    return RunResponse(**report.to_dict())
