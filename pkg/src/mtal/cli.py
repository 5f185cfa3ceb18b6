"""Command-line client.

Subcommands talk HTTP to the service: by default the ASGI app is mounted
in-process (no server needed, same filesystem), while --server targets a
running instance. validate/preprocess ship corpus lines through the
request, so they work against remote servers too; train/grid pass
filesystem paths and expect to share a filesystem with the server.

Exit codes: 0 success, 1 runtime failure, 2 input/config validation
failure.
"""

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .config import (
    ConfigurationError,
    config_hash,
    load_experiment_config,
    load_grid_config,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


class ClientError(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _request(method: str, path: str, payload, server):
    async def go():
        if server:
            transport = None
            base_url = server.rstrip("/")
        else:
            from .service.app import create_app

            transport = httpx.ASGITransport(app=create_app())
            base_url = "http://mtal.local"
        async with httpx.AsyncClient(transport=transport, base_url=base_url, timeout=None) as client:
            response = await client.request(method, path, json=payload)
            try:
                body = response.json()
            except ValueError:
                body = {"detail": response.text}
            return response.status_code, body

    try:
        return asyncio.run(go())
    except httpx.HTTPError as exc:
        raise ClientError(EXIT_RUNTIME, f"request failed: {exc}") from exc


def _check_response(status: int, body) -> None:
    if status == 200:
        return
    detail = body.get("detail", body) if isinstance(body, dict) else body
    if not isinstance(detail, str):
        detail = json.dumps(detail, ensure_ascii=False)
    if status == 422:
        raise ClientError(EXIT_INVALID, detail)
    raise ClientError(EXIT_RUNTIME, f"HTTP {status}: {detail}")


def _read_lines(path) -> list:
    file_path = Path(path)
    if not file_path.is_file():
        raise ClientError(EXIT_INVALID, f"file not found: {file_path}")
    return file_path.read_text(encoding="utf-8").splitlines()


def _load_config(path, seed_override=None):
    try:
        cfg = load_experiment_config(path)
    except FileNotFoundError:
        raise ClientError(EXIT_INVALID, f"config file not found: {path}")
    except Exception as exc:  # TOML or schema errors, reported all at once
        raise ClientError(EXIT_INVALID, f"invalid config {path}:\n{exc}")
    if seed_override is not None:
        payload = cfg.model_dump()
        payload["run"]["seed"] = seed_override
        cfg = type(cfg).model_validate(payload)
    return cfg


def _parse_expectations(pairs):
    expectations = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ClientError(EXIT_INVALID, f"expectation must look like key=value, got {pair!r}")
        try:
            expectations[key] = int(value)
        except ValueError:
            raise ClientError(EXIT_INVALID, f"expectation value must be an integer, got {pair!r}")
    return expectations


def cmd_validate(args) -> int:
    cfg = _load_config(args.config)
    if cfg.data is None:
        raise ClientError(EXIT_INVALID, "config lacks the [data] column mapping section")
    print(f"config_hash={config_hash(cfg.resolved())}")
    splits = [
        ("train", args.train, args.expect_train),
        ("dev", args.dev, args.expect_dev),
        ("test", args.test, args.expect_test),
    ]
    requested = [(name, path, expect) for name, path, expect in splits if path]
    if not requested:
        raise ClientError(EXIT_INVALID, "no split paths given; pass --train/--dev/--test")
    all_ok = True
    for name, path, expect in requested:
        if name == "test" and cfg.data.test is not None:
            columns = cfg.data.test.model_dump(mode="json")
        else:
            columns = cfg.data.model_dump(mode="json", exclude={"test"})
        payload = {
            "lines": _read_lines(path),
            "columns": columns,
            "expectations": _parse_expectations(expect),
        }
        status, body = _request("POST", "/v1/corpus/validate", payload, args.server)
        _check_response(status, body)
        print(f"[{name}] {path}")
        for key, value in body["stats"].items():
            print(f"{key}={value}")
        for error in body["errors"]:
            print(f"error: line {error['line']}: {error['message']}")
        for failure in body["expectation_failures"]:
            print(f"expectation failed: {failure}")
        all_ok = all_ok and body["ok"]
    return EXIT_OK if all_ok else EXIT_INVALID


def cmd_preprocess(args) -> int:
    cfg = _load_config(args.config)
    payload = {
        "lines": _read_lines(args.input),
        "emoji": cfg.emoji.model_dump(mode="json"),
    }
    status, body = _request("POST", "/v1/preprocess", payload, args.server)
    _check_response(status, body)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("".join(line + "\n" for line in body["lines"]), encoding="utf-8")
    meta = {"config": cfg.resolved(), "config_hash": config_hash(cfg.resolved())}
    meta_path = out_path.with_name(out_path.name + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(body['lines'])} lines to {out_path}")
    print(f"config_hash={meta['config_hash']}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args.config, args.seed_override)
    payload = {
        "config": cfg.model_dump(mode="json"),
        "train_path": args.train,
        "dev_path": args.dev,
        "test_path": args.test,
        "out_dir": args.out,
    }
    status, body = _request("POST", "/v1/train", payload, args.server)
    _check_response(status, body)
    report = body["report"]

    def pct(value):
        return "-" if value is None else f"{100 * value:.2f}"

    print(f"config_hash={report['config_hash']}")
    print(
        f"epochs_run={report['epochs_run']} best_epoch={report['best_epoch']} "
        f"stopped_early={str(report['stopped_early']).lower()}"
    )
    print(f"cumulative_selected={report['cumulative_selected']}")
    test = report["test_macro_f1"]
    print(
        "test_macro_f1 "
        f"offensive={pct(test['offensive'])} violent={pct(test['violent'])} vulgar={pct(test['vulgar'])}"
    )
    print(f"report={body['report_path']}")
    print(f"checkpoint={body['checkpoint_path']}")
    return EXIT_OK


def cmd_grid(args) -> int:
    try:
        grid = load_grid_config(args.grid)
    except FileNotFoundError:
        raise ClientError(EXIT_INVALID, f"grid config not found: {args.grid}")
    except Exception as exc:
        raise ClientError(EXIT_INVALID, f"invalid grid config {args.grid}:\n{exc}")
    if args.seed_override is not None:
        payload = grid.model_dump()
        payload["base"]["run"]["seed"] = args.seed_override
        grid = type(grid).model_validate(payload)
    payload = {
        "grid": grid.model_dump(mode="json"),
        "train_path": args.train,
        "dev_path": args.dev,
        "test_path": args.test,
        "out_dir": args.out,
        "jobs": args.jobs,
    }
    status, body = _request("POST", "/v1/grid", payload, args.server)
    _check_response(status, body)
    summary = body["summary"]
    print(f"grid_config_hash={summary['grid_config_hash']}")
    for row in summary["cells"]:
        if row["status"] == "ok":
            f1 = row["test_macro_f1"]["offensive"]
            shown = "-" if f1 is None else f"{100 * f1:.2f}"
            print(f"[{row['index']:03d}] {row['name']}: test_off={shown}")
        else:
            print(f"[{row['index']:03d}] {row['name']}: FAILED ({row['error']})")
    failed = body["failed_cells"]
    print(f"cells={len(summary['cells'])} failed={failed}")
    print(f"summary={body['summary_json_path']}")
    print(f"table={body['summary_txt_path']}")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_server_flag(parser) -> None:
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running service (default: run the service in-process)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtal",
        description="Multi-task active learning for offensive-speech detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="parse corpus files and report label statistics")
    p_validate.add_argument("--config", required=True)
    p_validate.add_argument("--train")
    p_validate.add_argument("--dev")
    p_validate.add_argument("--test")
    p_validate.add_argument("--expect-train", action="append", metavar="KEY=VALUE")
    p_validate.add_argument("--expect-dev", action="append", metavar="KEY=VALUE")
    p_validate.add_argument("--expect-test", action="append", metavar="KEY=VALUE")
    _add_server_flag(p_validate)
    p_validate.set_defaults(handler=cmd_validate)

    p_pre = sub.add_parser("preprocess", help="normalize a raw text file, one tweet per line")
    p_pre.add_argument("--config", required=True)
    p_pre.add_argument("--input", required=True)
    p_pre.add_argument("--out", required=True)
    _add_server_flag(p_pre)
    p_pre.set_defaults(handler=cmd_preprocess)

    p_train = sub.add_parser("train", help="run one training experiment")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--train", required=True)
    p_train.add_argument("--dev", required=True)
    p_train.add_argument("--test", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--seed-override", type=int, default=None)
    _add_server_flag(p_train)
    p_train.set_defaults(handler=cmd_train)

    p_grid = sub.add_parser("grid", help="run a grid sweep of experiments")
    p_grid.add_argument("--grid", required=True)
    p_grid.add_argument("--train", required=True)
    p_grid.add_argument("--dev", required=True)
    p_grid.add_argument("--test", required=True)
    p_grid.add_argument("--out", required=True)
    p_grid.add_argument("--jobs", type=int, default=1)
    p_grid.add_argument("--seed-override", type=int, default=None)
    _add_server_flag(p_grid)
    p_grid.set_defaults(handler=cmd_grid)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ClientError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    except ConfigurationError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
