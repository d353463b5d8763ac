"""FastAPI application exposing the simulator and metrology operations."""

from __future__ import annotations

import math

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..campaign import run_sweep, summarize
from ..errors import InfeasibleTargetError, OtalinkError
from ..metrics import fit_gradient
from ..stbc import run_stbc_link
from ..uncertainty import InstrumentTerms, channel_power_uncertainty, repeat_stats
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(title="otalink", version=__version__)

    @app.exception_handler(OtalinkError)
    async def _domain_error(request, exc: OtalinkError):
        status = 409 if isinstance(exc, InfeasibleTargetError) else 422
        return JSONResponse(
            status_code=status,
            content={"detail": str(exc), "error": type(exc).__name__},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request, exc: ValueError):
        return JSONResponse(
            status_code=422,
            content={"detail": str(exc), "error": type(exc).__name__},
        )

    @app.get("/v1/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/v1/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        rows = run_sweep(req.config.to_config(), workers=req.workers)
        models = [schemas.SweepRowModel.from_row(r) for r in rows]
        n_ok = sum(1 for r in rows if r.status == "ok")
        return schemas.SweepResponse(
            rows=models, n_total=len(rows), n_ok=n_ok, n_skipped=len(rows) - n_ok
        )

    @app.post("/v1/fit", response_model=schemas.FitResponse)
    def fit(req: schemas.FitRequest):
        floor = req.sinr_floor_db if req.sinr_floor_db is not None else float("-inf")
        result = fit_gradient(req.points, sinr_floor_db=floor)
        return schemas.FitResponse(
            a=result.a,
            r_squared=result.r_squared,
            n_points=result.n_points,
            sinr_floor_db=result.sinr_floor_db if math.isfinite(result.sinr_floor_db) else None,
        )

    @app.post("/v1/budget", response_model=schemas.BudgetResponse)
    def budget(req: schemas.BudgetRequest):
        stats = repeat_stats(req.samples)
        terms = InstrumentTerms(**req.terms.model_dump())
        result = channel_power_uncertainty(stats, terms, combine=req.combine)
        return schemas.BudgetResponse(
            n=stats.n,
            mean=stats.mean,
            std=stats.std,
            expanded_k2=stats.expanded_k2,
            repeatability_db=result.repeatability_db,
            terms=req.terms,
            total_db=result.total_db,
        )

    @app.post("/v1/stbc", response_model=schemas.StbcResponse)
    def stbc(req: schemas.StbcRequest):
        results = run_stbc_link(req.to_config())
        out = []
        for i, res in enumerate(results):
            out.append(
                schemas.StbcSubframeModel(
                    subframe_index=i,
                    order=req.order,
                    estimation_mode=req.estimation_mode,
                    channel_power_signal=res.channel_power_signal,
                    channel_power_interference=res.channel_power_interference,
                    sinr_db=res.sinr.db if res.sinr is not None else None,
                    evm_rms_pct=res.evm.evm_rms,
                    normalized_evm_rms_pct=res.evm.normalized_evm_rms,
                    mag_err_rms_pct=res.evm.mag_err_rms,
                    phase_err_rms_rad=res.evm.phase_err_rms,
                )
            )
        return schemas.StbcResponse(subframes=out)

    @app.post("/v1/summarize", response_model=schemas.SummarizeResponse)
    def summarize_rows(req: schemas.SummarizeRequest):
        rows = [m.to_row() for m in req.rows]
        entries = summarize(rows, req.group_by)
        out = []
        for e in entries:
            group = {k: e[k] for k in req.group_by}
            out.append(
                schemas.SummaryEntryModel(
                    group=group,
                    metric=e["metric"],
                    n=e["n"],
                    mean=e["mean"],
                    std=e["std"],
                    expanded_k2=e["expanded_k2"],
                )
            )
        return schemas.SummarizeResponse(entries=out)

    return app


app = create_app()
