"""FastAPI service wrapping the packing and fair-distribution solvers.

The handler functions are plain callables over the pydantic models so the
CLI can invoke them in-process; the app wires them to routes for remote use.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..configlp import (
    BudgetExceeded,
    ConfigurationExplosion,
    enumerate_configurations,
    solve_fractional,
)
from ..core import Size, validate_packing, welfare
from ..datagen import generate_instance, generate_timeseries, make_rng, series_from_csv, series_to_csv
from ..exact import minimal_k, opt_table, rmax
from ..experiments import (
    pack_with,
    ratio_sweep,
    run_heuristic,
    simulate_series,
    summarize_runs,
    volume_lower_bound,
    watts_over_series,
)
from . import schemas as s


def handle_pack(req: s.PackRequest) -> s.PackResponse:
    instance = req.instance.to_instance()
    outcome = pack_with(req.alg, instance, req.k, req.eps, req.g, req.node_budget)
    verdict = validate_packing(instance, outcome.packing)
    lp_dump = None
    if req.dump_lp:
        system = enumerate_configurations(instance)
        lp = solve_fractional(system, req.k)
        lp_dump = {"system": json.loads(system.to_json()), "solution": json.loads(lp.to_json())}
    if outcome.optimal is False:
        raise BudgetExceeded("branch-and-bound node budget exceeded")
    return s.PackResponse(
        packing=s.PackingModel.from_packing(outcome.packing),
        bins=outcome.bins,
        volume_lower_bound=volume_lower_bound(instance, req.k),
        valid=verdict.ok,
        optimal=outcome.optimal,
        volume_certified=outcome.volume_certified,
        lp_dump=lp_dump,
    )


def handle_validate(req: s.ValidateRequest) -> s.VerdictModel:
    verdict = validate_packing(req.instance.to_instance(), req.packing.to_packing())
    return s.VerdictModel(ok=verdict.ok, reason=verdict.reason, bin_index=verdict.bin_index)


def handle_welfare(req: s.WelfareRequest) -> s.WelfareModel:
    rep = welfare(req.utilities)
    return s.WelfareModel(
        utilitarian=rep.utilitarian,
        egalitarian=rep.egalitarian,
        max_utility_difference=rep.max_utility_difference,
    )


def handle_rmax(req: s.RmaxRequest) -> s.RmaxResponse:
    instance = req.instance.to_instance()
    result = rmax(instance)
    table = opt_table(instance, req.k_max)
    found = minimal_k(instance, req.k_max)
    return s.RmaxResponse(
        r_max=str(result.r_max),
        minimal_k=found,
        opt_table=table,
        support=[(list(cfg), str(w)) for cfg, w in result.support],
    )


def handle_watts(req: s.WattsRequest) -> s.WattsResponse:
    instance = req.instance.to_instance()
    sol = run_heuristic(instance, req.ha, req.k, req.alg, req.u)
    return s.WattsResponse(
        g=sol.g,
        always_on=list(sol.always_on),
        bins=[list(b) for b in sol.bins],
        durations=[str(d) for d in sol.durations],
        watts=list(sol.watts),
        egalitarian=sol.egalitarian(),
        leximin_key=list(sol.key()),
    )


def handle_generate_instances(req: s.GenerateInstancesRequest) -> list[s.GeneratedInstanceModel]:
    rng = make_rng(req.seed)
    out = []
    for _ in range(req.count):
        gen = generate_instance(Size.from_str(req.capacity), req.opt, rng)
        out.append(
            s.GeneratedInstanceModel(
                instance=s.InstanceModel.from_instance(gen.instance),
                opt=gen.opt,
                certificate=[list(b) for b in gen.certificate],
                seed=req.seed,
            )
        )
    return out


def handle_generate_series(req: s.GenerateSeriesRequest) -> s.SeriesResponse:
    series = generate_timeseries(req.n_agents, req.weeks * 7 * 24, make_rng(req.seed))
    return s.SeriesResponse(csv=series_to_csv(series))


def handle_ratio(req: s.RatioRequest) -> list[s.RatioRow]:
    rows = ratio_sweep(
        req.algs,
        req.k_list,
        req.opt_list,
        req.instances_per_cell,
        req.seed,
        float(req.capacity),
    )
    return [s.RatioRow(**row) for row in rows]


def handle_simulate(req: s.SimulateRequest) -> s.SimulateResponse:
    series = series_from_csv(req.series_csv)
    results = simulate_series(
        series, req.k, req.alg, req.sigma, req.runs, req.seed, req.discard_weeks
    )
    summary = summarize_runs(results)
    return s.SimulateResponse(
        runs=[{"run": float(r.run), **r.flat()} for r in results],
        mean=summary["mean"],
        sd=summary["sd"],
    )


def handle_watts_series(req: s.WattsSeriesRequest) -> s.WattsSeriesResponse:
    series = series_from_csv(req.series_csv)
    metrics = watts_over_series(series, req.ha, req.k, req.alg, req.u)
    return s.WattsSeriesResponse(
        utilitarian=metrics.utilitarian,
        egalitarian=metrics.egalitarian,
        max_diff=metrics.max_diff,
        shedding_hours=metrics.shedding_hours,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="kbpack", version=__version__)

    def wrap(handler, req):
        try:
            return handler(req)
        except BudgetExceeded as exc:
            raise HTTPException(status_code=409, detail={"code": "budget-exceeded", "message": str(exc)})
        except ConfigurationExplosion as exc:
            raise HTTPException(status_code=409, detail={"code": "instance-too-large", "message": str(exc)})
        except ValueError as exc:
            raise HTTPException(status_code=422, detail={"code": "invalid-input", "message": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/pack", response_model=s.PackResponse)
    def pack(req: s.PackRequest):
        return wrap(handle_pack, req)

    @app.post("/validate", response_model=s.VerdictModel)
    def validate(req: s.ValidateRequest):
        return wrap(handle_validate, req)

    @app.post("/welfare", response_model=s.WelfareModel)
    def welfare_route(req: s.WelfareRequest):
        return wrap(handle_welfare, req)

    @app.post("/rmax", response_model=s.RmaxResponse)
    def rmax_route(req: s.RmaxRequest):
        return wrap(handle_rmax, req)

    @app.post("/watts/solve", response_model=s.WattsResponse)
    def watts_route(req: s.WattsRequest):
        return wrap(handle_watts, req)

    @app.post("/generate/instances", response_model=list[s.GeneratedInstanceModel])
    def generate_instances(req: s.GenerateInstancesRequest):
        return wrap(handle_generate_instances, req)

    @app.post("/generate/series", response_model=s.SeriesResponse)
    def generate_series(req: s.GenerateSeriesRequest):
        return wrap(handle_generate_series, req)

    @app.post("/experiments/ratio", response_model=list[s.RatioRow])
    def ratio(req: s.RatioRequest):
        return wrap(handle_ratio, req)

    @app.post("/experiments/simulate", response_model=s.SimulateResponse)
    def simulate(req: s.SimulateRequest):
        return wrap(handle_simulate, req)

    @app.post("/experiments/watts-series", response_model=s.WattsSeriesResponse)
    def watts_series(req: s.WattsSeriesRequest):
        return wrap(handle_watts_series, req)

    return app


app = create_app()
