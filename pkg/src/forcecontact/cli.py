"""Command-line interface.

Exit codes: 0 success, 1 unexpected failure, 2 usage, then one code per error
class: 3 I/O, 4 schema, 5 calibration-failed, 6 degenerate-motion,
7 channel-dead, 8 configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, pipeline, stats
from .errors import InputIOError, PipelineError
from .io.config import load_config
from .io.manifest import SessionManifest
from .synth.scene import load_scene_script, write_scene_fixture
from .synth.session import load_session_script, write_session_fixture


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="config file (key = value)")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable; wins over the file)",
    )


def _add_hand_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--hand",
        choices=["left", "right", "both"],
        default="both",
        help="which glove(s) to process (default: both present)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forcecontact",
        description="Force-glove contact labels and contacted-object pseudolabels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic oracle fixture")
    p.add_argument("kind", choices=["session", "scene"])
    p.add_argument("script", type=Path)
    p.add_argument("--out", type=Path, default=None, help="output session directory")
    p.add_argument("--seed", type=int, default=None, help="override the script seed")
    _add_config_args(p)

    for name, help_text in [
        ("filter", "condition raw sensor streams into consolidated signals"),
        ("label", "derive per-sample contact states and segments"),
        ("frames", "resample contact states onto video frames"),
        ("pseudolabel", "select contacted-object masks per contact frame"),
        ("plotdata", "emit tabular traces for the three standard panels"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("session", type=Path)
        _add_hand_arg(p)
        _add_config_args(p)

    p = sub.add_parser("sync", help="fit the device-to-video clock")
    p.add_argument("session", type=Path)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--events",
        type=str,
        default=None,
        help="event-pair file, or 'manifest' to use the per-hand files it lists",
    )
    group.add_argument("--xcorr", type=Path, default=None, help="motion proxy .fras")
    _add_hand_arg(p)
    _add_config_args(p)

    p = sub.add_parser("stats", help="corpus statistics over per-frame records")
    p.add_argument("corpus", type=Path, nargs="+")
    p.add_argument("--out", type=Path, default=None, help="where to write stats files")
    _add_config_args(p)

    p = sub.add_parser("validate", help="schema and invariant audit of a session")
    p.add_argument("session", type=Path)
    _add_config_args(p)

    return parser


def _resolve_config(args):
    overrides = {}
    for item in getattr(args, "overrides", []):
        if "=" not in item:
            raise InputIOError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return load_config(args.config, overrides)


def _hands(args) -> list[str] | None:
    hand = getattr(args, "hand", "both")
    return None if hand == "both" else [hand]


def _run(args) -> int:
    config = _resolve_config(args)

    if args.command == "synth":
        out = args.out
        if args.kind == "session":
            script = load_session_script(args.script)
        else:
            script = load_scene_script(args.script)
        if args.seed is not None:
            import dataclasses

            script = dataclasses.replace(script, seed=args.seed)
        if out is None:
            out = Path.cwd() / script.session_id
        if args.kind == "session":
            manifest = write_session_fixture(script, out)
        else:
            manifest = write_scene_fixture(script, out)
        print(f"wrote {args.kind} fixture {manifest.session_id} -> {out}")
        return 0

    if args.command == "stats":
        rows = stats.corpus_stats(args.corpus)
        out_dir = args.out if args.out is not None else Path(args.corpus[0])
        csv_path, txt_path = stats.write_stats(out_dir, rows, config.fingerprint())
        sys.stdout.write(txt_path.read_text())
        print(f"wrote {csv_path} and {txt_path}")
        return 0

    manifest = SessionManifest.load(args.session)

    if args.command == "validate":
        problems = pipeline.cmd_validate(manifest, config)
        for item in problems:
            print(f"problem: {item}", file=sys.stderr)
        if problems:
            print(f"validate: {len(problems)} problem(s) in {manifest.session_id}", file=sys.stderr)
            return InputIOError.exit_code
        print(f"validate: {manifest.session_id} ok")
        return 0

    if args.command == "filter":
        written = pipeline.cmd_filter(manifest, config, _hands(args))
    elif args.command == "label":
        written = pipeline.cmd_label(manifest, config, _hands(args))
    elif args.command == "frames":
        written = pipeline.cmd_frames(manifest, config, _hands(args))
    elif args.command == "pseudolabel":
        written = pipeline.cmd_pseudolabel(manifest, config, _hands(args))
    elif args.command == "plotdata":
        written = pipeline.cmd_plotdata(manifest, config, _hands(args))
    elif args.command == "sync":
        clocks = pipeline.cmd_sync(
            manifest,
            config,
            events_path=args.events,
            xcorr_path=args.xcorr,
            hands=_hands(args),
        )
        for hand, clock in clocks.items():
            print(
                f"{hand}: offset={clock.offset!r} s drift={clock.drift!r} "
                f"residual_rms={clock.residual_rms!r} s ({clock.method})"
            )
        return 0
    else:  # pragma: no cover - argparse guards this
        raise InputIOError(f"unknown command {args.command}")

    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # unexpected: keep the traceback short but honest
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
