from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from shadowtorus.config import TASKS, ExperimentConfig, load_config
from shadowtorus.errors import ShadowTorusError, UsageError
from shadowtorus.io import write_json
from shadowtorus.tasks import runner_for_task

OUT_ENV = "SHADOWTORUS_OUT"
DEFAULT_OUT = "runs"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="shadowtorus",
        description="Lyapunov-pair shadowing experiments on the 2-torus",
    )
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    helps = {
        "simulate": "Generate a seeded d-pseudotrajectory",
        "check-conditions": "Check C1-C9 at given (delta1, delta2, Delta)",
        "derive-chain": "Derive (Delta0, Delta, delta1, delta2, d) for an eps",
        "shadow": "Shadow random pseudotrajectories at the derived parameters",
        "stability": "Build a semiconjugacy to a small perturbation",
        "report": "Summarise every run below a directory",
    }
    for task in TASKS:
        t = sub.add_parser(task, help=helps[task])
        t.add_argument("--config", required=task != "report", type=Path)
        t.add_argument("--seed", required=False, type=int)
        t.add_argument("--out", required=False, type=Path)
        t.add_argument("--svg", action="store_true", help="Emit SVG overlays")
    return p


def resolve_out_dir(cfg: ExperimentConfig, flag: Path | None) -> Path:
    """--out, then the config's out_dir, then $SHADOWTORUS_OUT (or ./runs)/<task>.

    The report task defaults to the base directory itself.
    """

    if flag is not None:
        return flag
    if cfg.out_dir is not None:
        return Path(cfg.out_dir)
    base = Path(os.environ.get(OUT_ENV) or DEFAULT_OUT)
    return base if cfg.task == "report" else base / cfg.task


def _configure_logging(out_dir: Path) -> list[logging.Handler]:
    root = logging.getLogger("shadowtorus")
    root.setLevel(logging.INFO)

    stderr = logging.StreamHandler(sys.stderr)
    stderr.setLevel(logging.WARNING)
    stderr.setFormatter(logging.Formatter("shadowtorus: %(levelname)s: %(message)s"))

    out_dir.mkdir(parents=True, exist_ok=True)
    sidecar = logging.FileHandler(out_dir / "run.log", mode="w", encoding="utf-8")
    sidecar.setLevel(logging.INFO)
    sidecar.setFormatter(logging.Formatter(LOG_FORMAT))

    handlers: list[logging.Handler] = [stderr, sidecar]
    for h in handlers:
        root.addHandler(h)
    return handlers


def _release_logging(handlers: list[logging.Handler]) -> None:
    root = logging.getLogger("shadowtorus")
    for h in handlers:
        root.removeHandler(h)
        h.close()


def main(argv: list[str] | None = None) -> int:
    p = _build_parser()
    try:
        args = p.parse_args(argv)
        if args.config is None:
            cfg = ExperimentConfig(task=args.cmd)
        else:
            cfg = load_config(args.config, task=args.cmd)
    except ShadowTorusError as e:
        print(f"shadowtorus: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = resolve_out_dir(cfg, args.out)
    cfg = cfg.with_overrides(
        seed=args.seed, out_dir=str(out_dir), emit_svg=True if args.svg else None
    )
    handlers = _configure_logging(out_dir)
    log = logging.getLogger(__name__)
    try:
        log.info("task=%s seed=%d out=%s", cfg.task, cfg.seed, out_dir)
        write_json(out_dir / "resolved_config.json", cfg.to_json())
        outcome = runner_for_task(cfg.task).run(config=cfg, out_dir=out_dir)
    except ShadowTorusError as e:
        log.error("%s: %s", type(e).__name__, e)
        return EXIT_FAILED if isinstance(e, RuntimeError) else EXIT_USAGE
    finally:
        _release_logging(handlers)

    code = EXIT_OK if outcome.passed else EXIT_FAILED
    write_json(
        out_dir / "manifest.json",
        {
            "task": cfg.task,
            "status": "pass" if outcome.passed else "fail",
            "exit_code": code,
            "seed": cfg.seed,
            "artifacts": sorted([*outcome.artifacts, "resolved_config.json"]),
            "summary": outcome.summary,
        },
    )
    return code
