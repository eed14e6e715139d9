"""Command-line client for the kbpack service.

Every subcommand builds a request model and dispatches it either to an
in-process handler (default) or to a remote server given with --server; the
CLI itself only does file I/O and formatting.

Exit codes: 2 parse error, 3 infeasible flag combination, 4 solver budget
exceeded, 5 compute/server error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from . import __version__
from .configlp import BudgetExceeded, ConfigurationExplosion
from .experiments import ALL_ALGS
from .service import schemas as s
from .service.app import (
    handle_generate_instances,
    handle_generate_series,
    handle_pack,
    handle_ratio,
    handle_rmax,
    handle_simulate,
    handle_validate,
    handle_watts,
    handle_watts_series,
    handle_welfare,
)

EXIT_PARSE = 2
EXIT_FLAGS = 3
EXIT_BUDGET = 4
EXIT_COMPUTE = 5


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


_ROUTES = {
    "/pack": (handle_pack, s.PackResponse),
    "/validate": (handle_validate, s.VerdictModel),
    "/welfare": (handle_welfare, s.WelfareModel),
    "/rmax": (handle_rmax, s.RmaxResponse),
    "/watts/solve": (handle_watts, s.WattsResponse),
    "/generate/series": (handle_generate_series, s.SeriesResponse),
    "/experiments/ratio": (handle_ratio, None),
    "/experiments/simulate": (handle_simulate, s.SimulateResponse),
    "/experiments/watts-series": (handle_watts_series, s.WattsSeriesResponse),
}


class Client:
    """Posts requests to a remote server, or calls the handlers in-process."""

    def __init__(self, server: str | None):
        self.server = server
        self.http = httpx.Client(base_url=server, timeout=None) if server else None

    def call(self, path: str, request):
        if self.http is None:
            handler, _ = _ROUTES[path]
            try:
                return handler(request)
            except BudgetExceeded as exc:
                raise CliError(str(exc), EXIT_BUDGET)
            except ConfigurationExplosion as exc:
                raise CliError(str(exc), EXIT_BUDGET)
            except ValueError as exc:
                raise CliError(str(exc), EXIT_PARSE)
        resp = self.http.post(path, json=request.model_dump())
        if resp.status_code >= 400:
            detail = {}
            try:
                detail = resp.json().get("detail", {})
            except Exception:
                pass
            code = detail.get("code") if isinstance(detail, dict) else None
            message = detail.get("message", resp.text) if isinstance(detail, dict) else resp.text
            if code in ("budget-exceeded", "instance-too-large"):
                raise CliError(message, EXIT_BUDGET)
            if code == "invalid-input":
                raise CliError(message, EXIT_PARSE)
            raise CliError(message, EXIT_COMPUTE)
        handler, model = _ROUTES[path]
        data = resp.json()
        if model is None:
            return data
        return model.model_validate(data)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_PARSE)


def _load_instance(path: str) -> s.InstanceModel:
    try:
        data = json.loads(_read_text(path))
        model = s.InstanceModel(**data)
        model.to_instance()  # surface malformed demands now
        return model
    except CliError:
        raise
    except Exception as exc:
        raise CliError(f"bad instance file {path}: {exc}", EXIT_PARSE)


def _meta_line(args: argparse.Namespace, extra: str = "") -> str:
    flags = " ".join(
        f"{key}={value}"
        for key, value in sorted(vars(args).items())
        if key not in ("func", "server", "out") and value is not None
    )
    return f"# kbp v{__version__} {flags} {extra}".rstrip()


def _write_csv(path: str | None, meta: str, header: list[str], rows: list[list]) -> None:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.5f}"
        return str(v)

    lines = [meta, ",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands ---------------------------------------------------------------


def cmd_pack(args, client: Client) -> None:
    if args.alg in ("dlvl", "kk1") and args.eps is None:
        raise CliError(f"--alg {args.alg} requires --eps", EXIT_FLAGS)
    req = s.PackRequest(
        instance=_load_instance(args.instance),
        k=args.k,
        alg=args.alg,
        eps=args.eps,
        g=args.g,
        node_budget=args.node_budget,
        dump_lp=args.dump_lp,
    )
    resp = client.call("/pack", req)
    out = args.out or (Path(args.instance).stem + f".{args.alg}.packing.json")
    Path(out).write_text(resp.packing.to_packing().to_json() + "\n")
    parts = [f"bins={resp.bins}", f"volume_lower_bound={resp.volume_lower_bound}"]
    if resp.optimal is not None:
        parts.append("optimal=volume-certified" if resp.volume_certified else f"optimal={resp.optimal}")
    parts.append(f"valid={'ok' if resp.valid else 'VIOLATION'}")
    print(" ".join(parts))
    if resp.lp_dump is not None:
        Path(out + ".lp.json").write_text(json.dumps(resp.lp_dump, indent=2) + "\n")


def cmd_ratio(args, client: Client) -> None:
    req = s.RatioRequest(
        algs=args.alg.split(","),
        k_list=[int(v) for v in args.k_list.split(",")],
        opt_list=[int(v) for v in args.opt_list.split(",")],
        instances_per_cell=args.instances_per_cell,
        seed=args.seed,
        capacity=args.capacity,
    )
    rows = client.call("/experiments/ratio", req)
    if rows and not isinstance(rows[0], dict):
        rows = [r.model_dump() for r in rows]
    header = ["alg", "k", "opt", "opt_dk", "max_bins", "bound_ffk_conjecture", "bound_ffdk_conjecture"]
    _write_csv(args.out, _meta_line(args), header, [[r[h] for h in header] for r in rows])


def cmd_simulate(args, client: Client) -> None:
    if args.alg not in ("ffk", "ffdk"):
        raise CliError("simulate supports --alg ffk or ffdk", EXIT_FLAGS)
    req = s.SimulateRequest(
        series_csv=_read_text(args.series),
        k=args.k,
        alg=args.alg,
        sigma=args.sigma,
        runs=args.runs,
        seed=args.seed,
        discard_weeks=args.discard_weeks,
    )
    resp = client.call("/experiments/simulate", req)
    keys = [k for k in resp.runs[0] if k != "run"]
    header = ["run"] + keys
    rows = [[int(r["run"])] + [r[k] for k in keys] for r in resp.runs]
    rows.append(["mean"] + [resp.mean[k] for k in keys])
    rows.append(["sd"] + [resp.sd[k] for k in keys])
    _write_csv(args.out, _meta_line(args), header, rows)


def cmd_watts(args, client: Client) -> None:
    if args.ha not in (1, 2, 3, 4):
        raise CliError("--ha must be 1, 2, 3 or 4", EXIT_FLAGS)
    if args.input.endswith(".json"):
        req = s.WattsRequest(
            instance=_load_instance(args.input), ha=args.ha, k=args.k, alg=args.alg, u=args.u
        )
        resp = client.call("/watts/solve", req)
        if args.out:
            Path(args.out).write_text(resp.model_dump_json(indent=2) + "\n")
        print(
            f"ha={args.ha} g={resp.g} egalitarian={resp.egalitarian:.5f} "
            f"always_on={len(resp.always_on)} bins={len(resp.bins)}"
        )
        return
    req = s.WattsSeriesRequest(
        series_csv=_read_text(args.input), ha=args.ha, k=args.k, alg=args.alg, u=args.u
    )
    resp = client.call("/experiments/watts-series", req)
    header = ["ha", "alg", "k", "utilitarian", "egalitarian", "max_utility_difference", "shedding_hours"]
    row = [args.ha, args.alg, args.k, resp.utilitarian, resp.egalitarian, resp.max_diff, resp.shedding_hours]
    _write_csv(args.out, _meta_line(args), header, [row])


def cmd_rmax(args, client: Client) -> None:
    req = s.RmaxRequest(instance=_load_instance(args.instance), k_max=args.k_max)
    resp = client.call("/rmax", req)
    print(f"r_max={resp.r_max}")
    print(f"minimal_k={resp.minimal_k if resp.minimal_k is not None else 'none'}")
    table = " ".join(f"{k}->{opt}" for k, opt in resp.opt_table)
    print(f"opt_table {table}")


def cmd_generate_series(args, client: Client) -> None:
    req = s.GenerateSeriesRequest(n_agents=args.agents, weeks=args.weeks, seed=args.seed)
    resp = client.call("/generate/series", req)
    Path(args.out).write_text(resp.csv)
    print(f"wrote {args.out}")


def cmd_generate_instances(args, client: Client) -> None:
    req = s.GenerateInstancesRequest(
        capacity=args.capacity, opt=args.opt, count=args.count, seed=args.seed
    )
    if client.http is None:
        models = handle_generate_instances(req)
        payload = [m.model_dump() for m in models]
    else:
        resp = client.http.post("/generate/instances", json=req.model_dump())
        if resp.status_code >= 400:
            raise CliError(resp.text, EXIT_COMPUTE)
        payload = resp.json()
    lines = [json.dumps(entry) for entry in payload]
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} instances to {args.out}")


def cmd_serve(args, client: Client) -> None:
    import uvicorn

    uvicorn.run("kbpack.service.app:app", host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbp", description=__doc__)
    parser.add_argument("--server", help="base URL of a running kbp service; default is in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pack", help="pack one instance file")
    p.add_argument("instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alg", default="ffk", choices=list(ALL_ALGS))
    p.add_argument("--eps", default=None)
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--node-budget", type=int, default=None)
    p.add_argument("--dump-lp", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("ratio", help="bound-vs-bins sweep over known-optimum instances")
    p.add_argument("--alg", default="ffk,ffdk")
    p.add_argument("--k-list", default="2,3,4,5")
    p.add_argument("--opt-list", default="2,3,4,5,6,7,8,9")
    p.add_argument("--instances-per-cell", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity", default="10.0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("simulate", help="hourly distribution simulation over a series CSV")
    p.add_argument("series")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alg", default="ffk")
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--runs", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--discard-weeks", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("watts", help="egalitarian watts heuristics on an instance or series")
    p.add_argument("input", help="instance .json or series .csv")
    p.add_argument("--ha", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alg", default="ffk", choices=["ffk", "ffdk"])
    p.add_argument("--u", default="0.25")
    p.add_argument("--out")
    p.set_defaults(func=cmd_watts)

    p = sub.add_parser("rmax", help="egalitarian connection time oracle")
    p.add_argument("instance")
    p.add_argument("--k-max", type=int, default=9)
    p.set_defaults(func=cmd_rmax)

    gen = sub.add_parser("generate", help="synthetic data")
    gsub = gen.add_subparsers(dest="what", required=True)
    p = gsub.add_parser("series")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--weeks", type=int, default=13)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_series)
    p = gsub.add_parser("instances")
    p.add_argument("--capacity", default="10.0")
    p.add_argument("--opt", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_instances)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else 0
    client = Client(args.server)
    try:
        args.func(args, client)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # compute failures
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return 0


if __name__ == "__main__":
    sys.exit(main())
