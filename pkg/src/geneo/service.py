"""HTTP service exposing the core operations.

Request/response bodies mirror the canonical JSON schemas of the core types.
The service is stateless: every request carries its own data.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .core import (
    DistanceMatrix,
    GridFunction,
    GridIsometry,
    IeneoParams,
    PersistenceDiagram,
    validate,
)
from .diagram_metric import DegreeMismatchError, bottleneck
from .learn import cluster_average_linkage, cut_dendrogram, distance_matrix
from .metrics import dist_phi, natural_pseudo_distance
from .operators import DegenerateKernelError, apply, make_kernel
from .persistence import persistence_diagram

app = FastAPI(title="geneo", version=__version__)


class GridModel(BaseModel):
    width: int
    height: int
    values: list[float]

    def to_core(self) -> GridFunction:
        try:
            f = GridFunction.from_json(self.model_dump())
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))
        problems = validate(f)
        if problems:
            raise HTTPException(status_code=422, detail=problems)
        return f

    @classmethod
    def from_core(cls, f: GridFunction) -> "GridModel":
        return cls(**f.to_json())


class DiagramModel(BaseModel):
    degree: int
    points: list[tuple[float, float]]
    essential: list[float]

    def to_core(self) -> PersistenceDiagram:
        try:
            return PersistenceDiagram.from_json(self.model_dump())
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))

    @classmethod
    def from_core(cls, d: PersistenceDiagram) -> "DiagramModel":
        return cls(**d.to_json())


class ParamsModel(BaseModel):
    a: list[float]
    tau: list[float]
    sigma: float
    support: int


class KernelModel(BaseModel):
    side: int
    weights: list[float]
    l1_norm: float


class PersistenceRequest(BaseModel):
    grid: GridModel
    degree: int = Field(ge=0, le=1)


class BottleneckRequest(BaseModel):
    first: DiagramModel
    second: DiagramModel


class ApplyRequest(BaseModel):
    kernel: KernelModel
    grid: GridModel


class DistanceRequest(BaseModel):
    metric: str = "phi"  # "phi" | "dg" | "dmatch"
    grids: list[GridModel]
    degree: int = 1
    kernels: list[KernelModel] | None = None  # dmatch only


class ClusterRequest(BaseModel):
    entries: list[float]
    n: int
    labels: list[int]
    cut: int | None = None


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/persistence", response_model=DiagramModel)
def persistence_endpoint(req: PersistenceRequest):
    return DiagramModel.from_core(persistence_diagram(req.grid.to_core(), req.degree))


@app.post("/bottleneck")
def bottleneck_endpoint(req: BottleneckRequest):
    try:
        d = bottleneck(req.first.to_core(), req.second.to_core())
    except DegreeMismatchError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return {"distance": d if math.isfinite(d) else "inf"}


@app.post("/kernel", response_model=KernelModel)
def kernel_endpoint(params: ParamsModel):
    p = IeneoParams(tuple(params.a), tuple(params.tau), params.sigma, params.support)
    problems = validate(p)
    if problems:
        raise HTTPException(status_code=422, detail=problems)
    try:
        k = make_kernel(p)
    except DegenerateKernelError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return KernelModel(**k.to_json())


@app.post("/apply", response_model=GridModel)
def apply_endpoint(req: ApplyRequest):
    from .core import Kernel

    k = Kernel.from_json(req.kernel.model_dump())
    problems = validate(k)
    if problems:
        raise HTTPException(status_code=422, detail=problems)
    try:
        return GridModel.from_core(apply(k, req.grid.to_core()))
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.post("/distance")
def distance_endpoint(req: DistanceRequest):
    from .core import Kernel, OperatorSet

    fs = [g.to_core() for g in req.grids]
    if len(fs) < 2:
        raise HTTPException(status_code=422, detail="need at least two grids")
    import numpy as np

    if req.metric == "dmatch":
        if not req.kernels:
            raise HTTPException(status_code=422, detail="dmatch needs kernels")
        kernels = [Kernel.from_json(k.model_dump()) for k in req.kernels]
        dummy = IeneoParams((1.0,), (1.0,), 1.0, kernels[0].side)
        opset = OperatorSet(
            tuple((i, dummy, k) for i, k in enumerate(kernels)),
            0,
            tuple(["selected"] * len(kernels)),
        )
        m = distance_matrix(fs, opset, req.degree)
    elif req.metric in ("phi", "dg"):
        n = len(fs)
        entries = np.zeros((n, n))
        group = GridIsometry.dihedral4()
        for i in range(n):
            for j in range(i + 1, n):
                if req.metric == "phi":
                    v = dist_phi(fs[i], fs[j])
                else:
                    v = natural_pseudo_distance(fs[i], fs[j], group)
                entries[i, j] = entries[j, i] = v
        m = DistanceMatrix(entries)
    else:
        raise HTTPException(status_code=422, detail=f"unknown metric {req.metric!r}")
    return m.to_json()


@app.post("/cluster")
def cluster_endpoint(req: ClusterRequest):
    m = DistanceMatrix.from_json({"n": req.n, "entries": req.entries})
    problems = validate(m)
    if problems:
        raise HTTPException(status_code=422, detail=problems)
    try:
        dend = cluster_average_linkage(m, req.labels)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    out = {"dendrogram": dend.to_json(), "newick": dend.to_newick()}
    if req.cut:
        cut = cut_dendrogram(dend, req.cut)
        out["cut"] = {"assignments": list(cut.assignments), "purity": cut.purity}
    return out
