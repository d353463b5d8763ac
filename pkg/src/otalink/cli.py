"""Command-line front end: a thin client of the service API.

By default the CLI talks to the application in-process (no sockets or
network involved); pass --base-url to aim the same commands at a running
server instead.  File I/O (configs in, CSV out) always happens locally.

Exit codes: 0 success, 2 config/schema error, 3 everything infeasible,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx
import yaml

from . import __version__
from .campaign import (
    GRADIENT_COLUMNS,
    SCHEMA_BUDGET,
    SCHEMA_GRADIENT,
    SCHEMA_SUMMARY,
    SweepRow,
    emit_csv,
    emit_plot_data,
    ingest_csv,
    write_csv,
)
from .errors import SchemaError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

STBC_COLUMNS = [
    "subframe_index",
    "order",
    "estimation_mode",
    "channel_power_signal",
    "channel_power_interference",
    "sinr_db",
    "evm_rms_pct",
    "normalized_evm_rms_pct",
    "mag_err_rms_pct",
    "phase_err_rms_rad",
]

_EVM_COLUMN = {"rms": "evm_rms_pct", "normalized_rms": "normalized_evm_rms_pct"}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class ServiceClient:
    """HTTP client for the service; in-process unless a base URL is given."""

    def __init__(self, base_url: str | None = None):
        if base_url:
            self._client = httpx.Client(base_url=base_url, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            try:
                body = response.json()
            except json.JSONDecodeError:
                body = {"detail": response.text}
            detail = body.get("detail", "service error")
            error = body.get("error", "")
            if error == "InfeasibleTargetError" or response.status_code == 409:
                raise CliError(f"infeasible: {detail}", EXIT_INFEASIBLE)
            raise CliError(f"request rejected: {detail}", EXIT_CONFIG)
        return response.json()

    def close(self):
        self._client.close()


def _load_yaml_section(path: str, section: str, known_sections: tuple[str, ...]) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as e:
        raise CliError(f"cannot read config: {e}", EXIT_IO)
    except yaml.YAMLError as e:
        raise CliError(f"malformed YAML: {e}", EXIT_CONFIG)
    if not isinstance(doc, dict):
        raise CliError("config must be a mapping of sections", EXIT_CONFIG)
    unknown = set(doc) - set(known_sections)
    if unknown:
        raise CliError(f"unknown config section {sorted(unknown)[0]!r}", EXIT_CONFIG)
    if section not in doc:
        raise CliError(f"config is missing the {section!r} section", EXIT_CONFIG)
    body = doc[section]
    if not isinstance(body, dict):
        raise CliError(f"section {section!r} must be a mapping", EXIT_CONFIG)
    return body


def _read_rows(path: str) -> list[SweepRow]:
    try:
        return ingest_csv(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}", EXIT_IO)
    except SchemaError as e:
        raise CliError(str(e), EXIT_CONFIG)


def _write_guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except OSError as e:
        raise CliError(f"cannot write output: {e}", EXIT_IO)


def _row_from_model(d: dict) -> SweepRow:
    return SweepRow(**d)


def cmd_sweep(args, client: ServiceClient) -> int:
    config = _load_yaml_section(args.config, "sweep", ("sweep",))
    response = client.post(
        "/v1/sweep", {"config": config, "workers": args.workers}
    )
    rows = [_row_from_model(d) for d in response["rows"]]
    _write_guard(emit_csv, rows, args.out)
    print(
        f"sweep: {response['n_ok']} ok, {response['n_skipped']} skipped "
        f"-> {args.out}"
    )
    if args.plot_data:
        if response["n_ok"] == 0:
            print("no usable rows; skipping plot data", file=sys.stderr)
        else:
            paths = _write_guard(
                emit_plot_data, rows, args.plot_data, sinr_floor_db=args.sinr_floor_db
            )
            for name, path in paths.items():
                print(f"plot-data {name}: {path}")
    if response["n_ok"] == 0:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_fit(args, client: ServiceClient) -> int:
    rows = _read_rows(args.input)
    kinds = ("rms", "normalized_rms") if args.evm_kind == "both" else (args.evm_kind,)
    orders = sorted({r.order for r in rows if r.status == "ok"})
    if not orders:
        raise CliError("no usable rows to fit", EXIT_INFEASIBLE)
    table = []
    for order in orders:
        for kind in kinds:
            column = _EVM_COLUMN[kind]
            points = [
                (10.0 ** (r.sinr_db / 10.0), getattr(r, column))
                for r in rows
                if r.status == "ok"
                and r.order == order
                and r.sinr_db is not None
                and getattr(r, column) is not None
            ]
            payload = {"points": points, "sinr_floor_db": args.sinr_floor_db}
            result = client.post("/v1/fit", payload)
            table.append(
                [
                    order,
                    kind,
                    result["a"],
                    result["r_squared"],
                    result["n_points"],
                    result["sinr_floor_db"],
                ]
            )
            print(
                f"order {order:>3} {kind:>15}: A = {result['a']:.3f}  "
                f"R^2 = {result['r_squared']:.4f}  (n={result['n_points']})"
            )
    if args.out:
        _write_guard(write_csv, args.out, SCHEMA_GRADIENT, GRADIENT_COLUMNS, table)
    return EXIT_OK


def cmd_budget(args, client: ServiceClient) -> int:
    rows = _read_rows(args.input)
    if args.group_by == "none":
        groups = {None: rows}
    else:
        groups = {}
        for r in rows:
            groups.setdefault(getattr(r, args.group_by), []).append(r)
    header = [
        args.group_by,
        "n",
        "mean",
        "std",
        "repeatability_db",
        "total_db",
    ]
    table = []
    for key in sorted(k for k in groups if k is not None) or [None]:
        members = groups[key] if key is not None else rows
        samples = [
            getattr(r, args.column)
            for r in members
            if r.status == "ok" and getattr(r, args.column) is not None
        ]
        if len(samples) < 2:
            continue
        payload = {"samples": samples, "combine": args.combine}
        result = client.post("/v1/budget", payload)
        table.append(
            [
                key if key is not None else "all",
                result["n"],
                result["mean"],
                result["std"],
                result["repeatability_db"],
                result["total_db"],
            ]
        )
        label = f"{args.group_by}={key}" if key is not None else "all rows"
        print(
            f"budget [{label}]: n={result['n']} mean={result['mean']:.6g} "
            f"U = {result['total_db']:.4f} dB"
        )
    if not table:
        raise CliError("no group had enough repeat samples", EXIT_INFEASIBLE)
    if args.out:
        _write_guard(write_csv, args.out, SCHEMA_BUDGET, header, table)
    return EXIT_OK


def cmd_stbc(args, client: ServiceClient) -> int:
    config = _load_yaml_section(args.config, "stbc", ("stbc",))
    response = client.post("/v1/stbc", config)
    table = [[entry[c] for c in STBC_COLUMNS] for entry in response["subframes"]]
    for entry in response["subframes"]:
        sinr = entry["sinr_db"]
        sinr_txt = f"{sinr:.2f} dB" if sinr is not None else "undefined"
        print(
            f"subframe {entry['subframe_index']}: SINR {sinr_txt}  "
            f"normalized EVM {entry['normalized_evm_rms_pct']:.3f}%"
        )
    if args.out:
        _write_guard(write_csv, args.out, "otalink.stbc", STBC_COLUMNS, table)
    return EXIT_OK


def cmd_summarize(args, client: ServiceClient) -> int:
    rows = _read_rows(args.input)
    group_by = [c.strip() for c in args.group_by.split(",") if c.strip()]
    payload = {
        "rows": [r.__dict__ for r in rows],
        "group_by": group_by,
    }
    response = client.post("/v1/summarize", payload)
    header = group_by + ["metric", "n", "mean", "std", "expanded_k2"]
    table = []
    for entry in response["entries"]:
        table.append(
            [entry["group"][c] for c in group_by]
            + [entry["metric"], entry["n"], entry["mean"], entry["std"], entry["expanded_k2"]]
        )
    if args.out:
        _write_guard(write_csv, args.out, SCHEMA_SUMMARY, header, table)
    else:
        for line in table:
            print(",".join(str(v) for v in line))
    return EXIT_OK


def cmd_serve(args, client=None) -> int:
    import uvicorn

    uvicorn.run("otalink.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otalink",
        description="Link-performance sweeps, EVM/SINR fits and uncertainty budgets",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--base-url",
        default=None,
        help="URL of a running otalink server (default: run in-process)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sweep campaign from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--plot-data", default=None, help="directory for per-figure CSVs")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sinr-floor-db", type=float, default=float("-inf"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="gradient fit over a sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--evm-kind", choices=["rms", "normalized_rms", "both"], default="both")
    p.add_argument("--sinr-floor-db", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("budget", help="channel-power uncertainty budget from repeats")
    p.add_argument("--input", required=True)
    p.add_argument("--column", default="channel_power_signal")
    p.add_argument("--group-by", default="sweep_value", choices=["sweep_value", "order", "none"])
    p.add_argument("--combine", default="sum", choices=["sum", "rss"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("stbc", help="single STBC link run from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stbc)

    p = sub.add_parser("summarize", help="grouped error-bar statistics from a sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--group-by", default="sweep_value")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return args.func(args)
    client = ServiceClient(args.base_url)
    try:
        return args.func(args, client)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
