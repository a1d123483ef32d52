"""Operator command line: run the service, seed demo data, validate
wordlists, replay scenario scripts.

Exit codes: 0 success, 1 validation/assertion failure, 2 environment failure.
"""

from __future__ import annotations

import argparse
import socket
import sys
import threading
from pathlib import Path

from .config import ServiceConfig, default_wordlist_path
from .domain import GeoPoint
from .errors import CorruptStore, DomainError
from .keywords import load_wordlist
from .scenario import (
    ScenarioParseError,
    ScenarioRuntimeError,
    parse_scenario,
    run_scenario,
)
from .seed import DEFAULT_CENTER, seed_store
from .service import Service
from .store import Store

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ENVIRONMENT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="favornet", description="favor-exchange platform operations"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service until interrupted")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None, help="0 picks a free port")
    serve.add_argument("--data-dir", default=None, help="omit for an in-memory store")
    serve.add_argument("--wordlist", default=None, help="path to the keyword wordlist")
    serve.add_argument("--nearby-radius-m", type=float, default=None)
    serve.add_argument("--sos-radius-m", type=float, default=None)
    serve.add_argument("--rating-window-days", type=int, default=None)
    serve.add_argument("--sweep-interval-s", type=float, default=None)

    seed = sub.add_parser("seed", help="write a deterministic demo population")
    seed.add_argument("--data-dir", required=True)
    seed.add_argument("--users", type=int, default=10)
    seed.add_argument("--requests", type=int, default=20)
    seed.add_argument("--seed", type=int, default=42)
    seed.add_argument("--center-lat", type=float, default=DEFAULT_CENTER.latitude)
    seed.add_argument("--center-lon", type=float, default=DEFAULT_CENTER.longitude)
    seed.add_argument("--force", action="store_true", help="overwrite a non-empty store")

    check = sub.add_parser("wordlist-check", help="validate a wordlist file")
    check.add_argument("path")

    scenario = sub.add_parser("scenario", help="replay a scripted call sequence")
    scenario.add_argument("script")
    scenario.add_argument("--base-url", default="http://127.0.0.1:8080")

    return parser


def cmd_serve(args) -> int:
    config = ServiceConfig.from_env(
        host=args.host,
        port=args.port,
        data_dir=args.data_dir,
        wordlist_path=args.wordlist,
        nearby_radius_m=args.nearby_radius_m,
        sos_radius_m=args.sos_radius_m,
        rating_window_days=args.rating_window_days,
        sweep_interval_s=args.sweep_interval_s,
    )

    wordlist_path = Path(config.wordlist_path) if config.wordlist_path else default_wordlist_path()
    try:
        wordlist = load_wordlist(
            wordlist_path.read_text(encoding="utf-8"), wordlist_path.name
        )
    except OSError as exc:
        print(f"cannot read wordlist: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    except DomainError as exc:
        print(f"invalid wordlist: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT

    try:
        if config.data_dir is not None:
            Path(config.data_dir).mkdir(parents=True, exist_ok=True)
            store = Store.load(config.data_dir)
        else:
            store = Store()
    except CorruptStore as exc:
        print(f"refusing to start, store is corrupt: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    except OSError as exc:
        print(f"cannot open data dir: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT

    service = Service(store, config, wordlist)

    from .api import create_app  # deferred: keeps fast CLI paths import-light
    import uvicorn

    app = create_app(service)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((config.host, config.port))
    except OSError as exc:
        print(f"cannot bind {config.host}:{config.port}: {exc}", file=sys.stderr)
        sock.close()
        return EXIT_ENVIRONMENT
    host, port = sock.getsockname()[:2]
    print(f"favornet listening on http://{host}:{port}", flush=True)

    stop = threading.Event()

    def sweeper():
        while not stop.wait(config.sweep_interval_s):
            try:
                service.sweep()
            except Exception as exc:  # keep the sweeper alive
                print(f"sweep failed: {exc}", file=sys.stderr)

    thread = threading.Thread(target=sweeper, name="favornet-sweeper", daemon=True)
    thread.start()
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning", access_log=False))
    try:
        server.run(sockets=[sock])
    finally:
        stop.set()
        store.flush_all()
        print("store flushed, bye")
    return EXIT_OK


def cmd_seed(args) -> int:
    try:
        center = GeoPoint(latitude=args.center_lat, longitude=args.center_lon)
        counts = seed_store(
            args.data_dir,
            n_users=args.users,
            n_requests=args.requests,
            seed=args.seed,
            center=center,
            force=args.force,
        )
    except FileExistsError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILURE
    except DomainError as exc:
        print(f"seeding failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"cannot write store: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    print(
        f"seeded {counts['users']} users, {counts['badges']} badges, "
        f"{counts['requests']} requests into {args.data_dir}"
    )
    return EXIT_OK


def cmd_wordlist_check(args) -> int:
    path = Path(args.path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    try:
        wordlist = load_wordlist(text, path.name)
    except DomainError as exc:
        print(f"FAIL {path.name}: {exc}")
        return EXIT_FAILURE
    print(f"ok {path.name}: {len(wordlist.words)} words")
    return EXIT_OK


def cmd_scenario(args) -> int:
    path = Path(args.script)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    try:
        calls = parse_scenario(text)
    except ScenarioParseError as exc:
        print(f"script error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        report = run_scenario(calls, args.base_url)
    except ScenarioRuntimeError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    print(f"{report.total - report.failed}/{report.total} calls passed")
    return EXIT_OK if report.ok else EXIT_FAILURE


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "serve": cmd_serve,
        "seed": cmd_seed,
        "wordlist-check": cmd_wordlist_check,
        "scenario": cmd_scenario,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
