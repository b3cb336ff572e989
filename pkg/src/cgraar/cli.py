"""Command-line front end: a thin client over the job layer.

Every flag mirrors a key of the matching request model; ``--config`` loads
the same keys from a JSON file and explicit flags override it. By default
jobs execute in-process; ``--server URL`` sends the identical request to a
running service instead (paths then refer to the server's filesystem).

Exit codes: 0 success, 2 usage error, 3 ensemble selected no trials,
4 data-format error.
"""

from __future__ import annotations

import argparse
import json
import sys

from pydantic import ValidationError

from . import __version__, jobs
from .errors import CgraarError, ContainerError
from .schemas import EnsembleRequest, EvaluateRequest, ReconstructRequest, SimulateRequest

USAGE_EXIT = 2
EMPTY_SELECTION_EXIT = 3
DATA_FORMAT_EXIT = 4

_SOLVER_FLAGS = [
    ("--algo", str, "algorithm: er|hio|dm|raar|raar-er|cg-raar"),
    ("--data", str, "intensity container (.cgr)"),
    ("--support", str, "support container (.cgr)"),
    ("--out", str, "output directory"),
    ("--beta", float, "relaxation parameter"),
    ("--gamma-m", float, "difference-map magnitude relaxation (default 1/beta)"),
    ("--gamma-s", float, "difference-map support relaxation (default -1/beta)"),
    ("--iters", int, "main iterations (non-guided algorithms)"),
    ("--er-tail", int, "concluding ER iterations (default 100 for raar-er, else 0)"),
    ("--warmup", int, "plain RAAR iterations before guidance (cg-raar)"),
    ("--guided", int, "guided iterations (cg-raar)"),
    ("--tolerance", float, "complexity matching band"),
    ("--tau", float, "complexity sub-iteration step size"),
    ("--window", int, "history window for outside-complexity control"),
    ("--max-out-subiters", int, "cap on outside sub-iterations"),
    ("--max-in-subiters", int, "cap on inside sub-iterations"),
]


def _add_flags(parser: argparse.ArgumentParser, flags) -> None:
    parser.add_argument("--config", type=str, default=None, help="JSON file with defaults for any flag")
    for name, ftype, help_text in flags:
        parser.add_argument(name, type=ftype, default=None, help=help_text)


def _add_refresh_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--refresh-zeta0",
        choices=["auto", "on", "off"],
        default=None,
        help="re-estimate target complexity each guided iteration (default: auto)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgraar", description="Complexity-guided RAAR phase retrieval")
    parser.add_argument("--version", action="version", version=f"cgraar {__version__}")
    parser.add_argument("--server", type=str, default=None, help="base URL of a running cgraar service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a phantom and noisy oversampled intensity data")
    _add_flags(
        p,
        [
            ("--phantom", str, "phantom kind: disc-blobs|annulus|text-like"),
            ("--window", int, "computational window in pixels"),
            ("--support", int, "support side length in pixels"),
            ("--photons", float, "mean photons/pixel (0 for noiseless data)"),
            ("--beamstop-radius", float, "centered beam-stop radius in pixels"),
            ("--seed", int, "noise seed"),
            ("--out", str, "output directory"),
        ],
    )

    p = sub.add_parser("reconstruct", help="run one seeded reconstruction")
    _add_flags(p, _SOLVER_FLAGS + [("--seed", int, "random-guess seed")])
    _add_refresh_flag(p)

    p = sub.add_parser("ensemble", help="run seeded trials, align, select, and average")
    _add_flags(
        p,
        _SOLVER_FLAGS
        + [
            ("--trials", int, "number of independent trials"),
            ("--threshold", float, "correlation selection threshold"),
            ("--jobs", int, "parallel workers (default: $CGRAAR_JOBS or 1)"),
            ("--base-seed", int, "seed of trial 0; trial t uses base-seed + t"),
        ],
    )
    _add_refresh_flag(p)

    p = sub.add_parser("evaluate", help="PRTF, resolution, and errors for a saved reconstruction")
    _add_flags(
        p,
        [
            ("--field", str, "reconstruction container (.cgr)"),
            ("--data", str, "intensity container (.cgr)"),
            ("--truth", str, "ground-truth field container for the real-space error"),
            ("--out", str, "output directory"),
        ],
    )

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", type=str, default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _merge_payload(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    payload: dict = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read --config {args.config}: {exc}")
        if not isinstance(loaded, dict):
            parser.error(f"--config {args.config} must hold a JSON object")
        payload.update({str(k).replace("-", "_"): v for k, v in loaded.items()})
    skip = {"command", "config", "server"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            payload[key] = value
    return payload


def _check_schedule_flags(args, payload, parser) -> None:
    algo = payload.get("algo", "raar-er")
    guided_given = args.guided is not None or args.warmup is not None
    plain_given = args.iters is not None or args.er_tail is not None
    if algo != "cg-raar" and guided_given:
        parser.error(f"--warmup/--guided apply only to --algo cg-raar (got {algo})")
    if algo == "cg-raar" and plain_given:
        parser.error("--iters/--er-tail do not apply to --algo cg-raar (use --warmup/--guided)")


def _require(payload: dict, keys, parser: argparse.ArgumentParser) -> None:
    for key in keys:
        if key not in payload:
            parser.error(f"--{key.replace('_', '-')} is required")


def _post(server: str, command: str, payload: dict) -> tuple[int, dict]:
    import httpx

    response = httpx.post(f"{server.rstrip('/')}/{command}", json=payload, timeout=None)
    try:
        body = response.json()
    except ValueError:
        body = {"detail": response.text}
    return response.status_code, body


def _dispatch(command: str, model_cls, payload: dict, server: str | None) -> int:
    if server is not None:
        status, body = _post(server, command, payload)
        if status >= 400:
            print(json.dumps(body, indent=2), file=sys.stderr)
            if body.get("code") == "data-format":
                return DATA_FORMAT_EXIT
            return USAGE_EXIT if status == 422 else 1
        result = body
    else:
        try:
            request = model_cls(**payload)
        except ValidationError as exc:
            print(f"invalid request: {exc}", file=sys.stderr)
            return USAGE_EXIT
        try:
            runner = getattr(jobs, f"run_{command}")
            result = runner(request).model_dump()
        except ContainerError as exc:
            print(f"data format error: {exc}", file=sys.stderr)
            return DATA_FORMAT_EXIT
        except FileNotFoundError as exc:
            print(f"missing input: {exc}", file=sys.stderr)
            return DATA_FORMAT_EXIT
        except (CgraarError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    if result.get("warning"):
        print(f"warning: {result['warning']}", file=sys.stderr)
    print(json.dumps(result, indent=2, sort_keys=True))
    if command == "ensemble" and result.get("selected_count") == 0:
        print("no trials met the correlation threshold", file=sys.stderr)
        return EMPTY_SELECTION_EXIT
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    payload = _merge_payload(args, parser)
    if args.command == "simulate":
        if payload.get("photons") == 0:
            payload["photons"] = None
        _require(payload, ["out"], parser)
        return _dispatch("simulate", SimulateRequest, payload, args.server)
    if args.command == "reconstruct":
        _check_schedule_flags(args, payload, parser)
        if payload.get("refresh_zeta0") in ("auto", "on", "off"):
            payload["refresh_zeta0"] = {"auto": None, "on": True, "off": False}[payload["refresh_zeta0"]]
        _require(payload, ["data", "support", "out"], parser)
        return _dispatch("reconstruct", ReconstructRequest, payload, args.server)
    if args.command == "ensemble":
        _check_schedule_flags(args, payload, parser)
        if payload.get("refresh_zeta0") in ("auto", "on", "off"):
            payload["refresh_zeta0"] = {"auto": None, "on": True, "off": False}[payload["refresh_zeta0"]]
        _require(payload, ["data", "support", "out"], parser)
        return _dispatch("ensemble", EnsembleRequest, payload, args.server)
    _require(payload, ["field", "data", "out"], parser)
    return _dispatch("evaluate", EvaluateRequest, payload, args.server)


if __name__ == "__main__":
    sys.exit(main())
