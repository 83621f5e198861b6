"""Command-line client for the kgraph-kms service.

The CLI is a thin HTTP client: it reads the graph file, posts the job to the
service, and writes the returned report.  By default it mounts the service
in-process (no network, same wire format); pass --server to talk to a
running instance instead.  Exit codes: 0 all checks passed, 1 a check or
k-graph axiom failed, 2 unusable input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

import httpx

from .reports import render_json
from .runner import COMMANDS

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_INPUT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgraph-kms",
        description="Equilibrium-state suites for finite k-graph path-space shifts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--input", required=True, help="k-graph text file")
        p.add_argument("--beta", type=float, default=None, help="inverse temperature")
        p.add_argument(
            "--r",
            default=None,
            help='dynamics vector: comma-separated positives, or "preferred"',
        )
        p.add_argument("--levels", type=int, default=2, help="measure box level")
        p.add_argument("--window", type=int, default=1, help="window margin for operator checks")
        p.add_argument("--depth", type=int, default=2, help="depth budget for samples")
        p.add_argument("--tol", type=float, default=1e-9, help="generic check tolerance")
        p.add_argument("--samples", type=int, default=40, help="sample count for randomized suites")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (fixed seed -> identical report)")
        p.add_argument("--out", default=None, help="write the report JSON here")
        p.add_argument("--server", default=None, help="base URL of a running service (default: in-process)")
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8642)
    return parser


def _parse_r(raw: Optional[str]):
    if raw is None:
        return None
    if raw == "preferred":
        return raw
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise SystemExit(f"cannot parse --r value {raw!r}")


def _client(server: Optional[str]):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

        from .service import app

    return TestClient(app)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_PASS

    path = Path(args.input)
    if not path.is_file():
        print(f"input file not found: {path}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    payload = {
        "graph": path.read_text(),
        "beta": args.beta,
        "r": _parse_r(args.r),
        "levels": args.levels,
        "window": args.window,
        "depth": args.depth,
        "tol": args.tol,
        "samples": args.samples,
        "seed": args.seed,
    }
    with _client(args.server) as client:
        resp = client.post(f"/run/{args.command}", json=payload)

    if resp.status_code == 200:
        report = resp.json()
        text = render_json(report)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        n_pass = sum(1 for c in report["checks"] if c["passed"])
        print(f"{args.command}: {n_pass}/{len(report['checks'])} checks passed", file=sys.stderr)
        return EXIT_PASS if report["passed"] else EXIT_CHECK_FAILURE

    try:
        detail = resp.json().get("detail", {})
    except Exception:
        detail = {}
    if isinstance(detail, dict) and detail.get("kind"):
        kind = detail["kind"]
        print(f"{kind} error: {detail.get('message')}", file=sys.stderr)
        return EXIT_CHECK_FAILURE if kind == "axiom" else EXIT_INPUT_ERROR
    # pydantic validation errors and anything else unusable
    print(f"request rejected ({resp.status_code}): {resp.text}", file=sys.stderr)
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
