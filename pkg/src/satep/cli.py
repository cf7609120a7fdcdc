"""Operational entry point: serve, migrate, seed-admin, drain.

Exit codes: 0 success, 1 configuration problem, 2 storage problem,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import signal
import socket
import sqlite3
import sys
import threading
from pathlib import Path

from satep.config import Config, load_config
from satep.errors import ConfigError, MigrationConflict, SatepError, StorageUnavailable
from satep.runtime import Platform, build_platform
from satep.storage import Database, apply_migrations, default_migrations_dir

log = logging.getLogger("satep.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STORAGE = 2
EXIT_RUNTIME = 3

DRAIN_INTERVAL_SECONDS = 30.0


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration problems, not storage ones; argparse's
    # default exit(2) would collide with the storage exit code
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="satep", description="Tele-education platform server.")
    parser.add_argument("--config", metavar="PATH", help="key=value config file")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides",
                        help="override one config key; wins over file and environment")
    parser.add_argument("--allow-deterministic", action="store_true",
                        help="permit rng_seed in the effective configuration")
    commands = parser.add_subparsers(dest="command", required=True)

    serve = commands.add_parser("serve", help="run the HTTP server")
    serve.add_argument("--migrate", action="store_true",
                       help="apply pending migrations before binding")

    commands.add_parser("migrate", help="create/upgrade the database schema")
    commands.add_parser("drain", help="deliver pending outbox mail once")

    seed = commands.add_parser("seed-admin", help="create an administrator account")
    for field in ("name", "surname", "username", "email", "department"):
        seed.add_argument(f"--{field}", required=True)
    return parser


def _load(args) -> Config:
    overrides = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key] = value
    return load_config(args.config, overrides=overrides,
                       allow_deterministic=args.allow_deterministic)


def _prepare_directories(config: Config) -> None:
    Path(config.data_root).mkdir(parents=True, exist_ok=True)
    Path(config.database_location).parent.mkdir(parents=True, exist_ok=True)
    if config.mail_transport == "file_sink":
        Path(config.mail_directory).mkdir(parents=True, exist_ok=True)


def _pending_migrations(db: Database) -> list[str]:
    try:
        applied = {row["Name"] for row in db.query("SELECT Name FROM schema_migrations")}
    except sqlite3.OperationalError:
        applied = set()
    return [p.name for p in sorted(default_migrations_dir().glob("*.sql"))
            if p.name not in applied]


def cmd_migrate(config: Config) -> int:
    _prepare_directories(config)
    db = Database(config.database_location)
    try:
        applied = apply_migrations(db)
    finally:
        db.close()
    if applied:
        for name in applied:
            print(f"applied {name}")
    else:
        print("schema is current; nothing to apply")
    return EXIT_OK


def cmd_seed_admin(config: Config, args) -> int:
    platform = build_platform(config)
    try:
        created = platform.accounts.seed_admin(
            name=args.name, surname=args.surname, username=args.username,
            email=args.email, department=args.department,
        )
    finally:
        platform.close()
    print(f"administrator {created['username']!r} created (id {created['id']})")
    print(f"one-time password: {created['password']}")
    print("store it now; it is not retrievable later")
    return EXIT_OK


def cmd_drain(config: Config) -> int:
    platform = build_platform(config)
    try:
        report = platform.drain_outbox()
    finally:
        platform.close()
    print(f"outbox drain: {report.sent} sent, {report.failed} failed")
    return EXIT_OK


def _check_ready(config: Config, migrate: bool) -> None:
    if migrate:
        _prepare_directories(config)
    if not Path(config.data_root).is_dir():
        raise ConfigError(
            f"data_root {config.data_root!r} does not exist; run `satep migrate` first"
        )
    if not Path(config.database_location).parent.is_dir():
        raise ConfigError(
            f"database directory for {config.database_location!r} does not exist"
        )
    db = Database(config.database_location)
    try:
        if migrate:
            for name in apply_migrations(db):
                print(f"applied {name}")
        pending = _pending_migrations(db)
        if pending:
            raise StorageUnavailable(
                f"database behind by {len(pending)} migration(s): {', '.join(pending)};"
                " run `satep migrate` or `satep serve --migrate`"
            )
    finally:
        db.close()


def _probe_bind(host: str, port: int) -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise SatepError(f"cannot bind {host}:{port}: {exc.strerror or exc}") from None
    finally:
        probe.close()


def cmd_serve(config: Config, migrate: bool) -> int:
    import uvicorn

    from satep.api import create_app

    _check_ready(config, migrate)
    _probe_bind(config.listen_host, config.listen_port)
    platform = build_platform(config)
    stop = threading.Event()

    def drain_loop():
        while not stop.wait(DRAIN_INTERVAL_SECONDS):
            try:
                platform.drain_outbox()
            except Exception:
                log.exception("periodic outbox drain failed")

    drainer = threading.Thread(target=drain_loop, name="outbox-drain", daemon=True)
    drainer.start()
    # uvicorn drains in-flight requests on SIGTERM/SIGINT, restores the
    # previous handlers, and replays the signal; park no-op handlers there so
    # the replay lands here instead of killing the process before cleanup
    previous_handlers = {}
    if threading.current_thread() is threading.main_thread():
        for signum in (signal.SIGINT, signal.SIGTERM):
            previous_handlers[signum] = signal.signal(signum, lambda s, f: None)
    try:
        server = uvicorn.Server(uvicorn.Config(
            create_app(platform),
            host=config.listen_host,
            port=config.listen_port,
            log_level="info",
        ))
        print(f"listening on http://{config.listen_host}:{config.listen_port}")
        server.run()
    finally:
        for signum, handler in previous_handlers.items():
            signal.signal(signum, handler)
        stop.set()
        drainer.join(timeout=5)
        platform.close()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _build_parser().parse_args(argv)
        config = _load(args)
        if args.command == "serve":
            return cmd_serve(config, args.migrate)
        if args.command == "migrate":
            return cmd_migrate(config)
        if args.command == "seed-admin":
            return cmd_seed_admin(config, args)
        return cmd_drain(config)
    except ConfigError as err:
        print(f"configuration error: {err.message}", file=sys.stderr)
        return EXIT_CONFIG
    except (StorageUnavailable, MigrationConflict) as err:
        print(f"storage error: {err.message}", file=sys.stderr)
        return EXIT_STORAGE
    except sqlite3.Error as err:
        print(f"storage error: {err}", file=sys.stderr)
        return EXIT_STORAGE
    except SatepError as err:
        print(f"error: {err.message}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
