from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from shadowtorus.errors import ConfigError, ShadowTorusError
from shadowtorus.model import SystemSpec
from shadowtorus.sampling import GridSpec
from shadowtorus.shadow import SolverConfig, validate_solver_config
from shadowtorus.validate import validate_system

TASKS = (
    "simulate",
    "check-conditions",
    "derive-chain",
    "shadow",
    "stability",
    "report",
)

# Every task parameter with its default; unknown keys are rejected.
TASK_DEFAULTS: dict[str, dict[str, Any]] = {
    "simulate": {"m": 100, "d": 1e-3, "p0": [0.1, 0.2]},
    "check-conditions": {"delta1": 0.01, "delta2": 0.01, "Delta": 0.03, "eps": 0.1},
    "derive-chain": {"eps": 0.05},
    "shadow": {
        "eps": 0.05,
        "m": 200,
        "trials": 10,
        "d_fraction": 1.0,
        "negative_control_step": None,
    },
    "stability": {
        "eps": 0.05,
        "grid_n": 16,
        "K": 25,
        "perturbation_fraction": 0.5,
        "expansivity_K": 40,
        "expansivity_pairs": 2000,
        "monotone_pairs": 1000,
        "monotone_steps": 30,
    },
    "report": {},
}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    task: str
    system: SystemSpec | None = None
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out_dir: str | None = None
    emit_svg: bool = False
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)

    @staticmethod
    def from_json(obj: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object", field="<root>")
        if "task" not in obj:
            raise ConfigError("missing required key", field="task")
        task = str(obj["task"]).strip().lower()
        if task not in TASKS:
            raise ConfigError(
                f"unknown task {obj['task']!r} (expected one of {', '.join(TASKS)})",
                field="task",
            )

        system: SystemSpec | None = None
        if "system" in obj and obj["system"] is not None:
            try:
                system = SystemSpec.from_json(obj["system"])
            except ConfigError as e:
                raise ConfigError(e.message, field=f"system.{e.field}") from None
        elif task != "report":
            raise ConfigError("missing required key", field="system")

        raw_params = obj.get("params") or {}
        if not isinstance(raw_params, dict):
            raise ConfigError("params must be an object", field="params")
        params = _resolve_params(task, raw_params)

        out_dir = obj.get("out_dir")
        try:
            return ExperimentConfig(
                task=task,
                system=system,
                params=params,
                seed=int(obj.get("seed", 0)),
                out_dir=str(out_dir) if out_dir is not None else None,
                emit_svg=bool(obj.get("emit_svg", False)),
                grid=GridSpec.from_json(obj.get("grid")),
                solver=SolverConfig.from_json(obj.get("solver")),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad value ({e})", field="<root>") from None

    def to_json(self) -> dict[str, Any]:
        return {
            "task": self.task,
            "system": self.system.to_json() if self.system is not None else None,
            "params": dict(self.params),
            "seed": self.seed,
            "out_dir": self.out_dir,
            "emit_svg": self.emit_svg,
            "grid": self.grid.to_json(),
            "solver": self.solver.to_json(),
        }

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        out_dir: str | None = None,
        emit_svg: bool | None = None,
    ) -> "ExperimentConfig":
        return replace(
            self,
            seed=self.seed if seed is None else int(seed),
            out_dir=self.out_dir if out_dir is None else str(out_dir),
            emit_svg=self.emit_svg if emit_svg is None else bool(emit_svg),
        )


def _coerce(key: str, raw: Any, default: Any) -> Any:
    try:
        if isinstance(default, list):
            vals = [float(x) for x in raw]
            if len(vals) != len(default):
                raise ValueError(f"expected {len(default)} numbers")
            return vals
        if default is None or isinstance(default, int):
            if raw is None:
                return None
            if isinstance(raw, bool) or float(raw) != int(raw):
                raise ValueError("expected an integer")
            return int(raw)
        return float(raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad value {raw!r} ({e})", field=f"params.{key}") from None


def _resolve_params(task: str, raw: dict[str, Any]) -> dict[str, Any]:
    defaults = TASK_DEFAULTS[task]
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError(
            f"unknown parameter for task {task!r}", field=f"params.{unknown[0]}"
        )
    out: dict[str, Any] = {}
    for key, default in defaults.items():
        if key in raw:
            out[key] = _coerce(key, raw[key], default)
        else:
            out[key] = list(default) if isinstance(default, list) else default
    return out


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(message, field=f"params.{key}")


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.task not in TASKS:
        raise ConfigError(f"unknown task {cfg.task!r}", field="task")
    if cfg.task != "report":
        if cfg.system is None:
            raise ConfigError("missing required key", field="system")
        try:
            validate_system(cfg.system)
        except ShadowTorusError as e:
            raise ConfigError(str(e), field="system") from e
    try:
        validate_solver_config(cfg.solver)
    except ShadowTorusError as e:
        raise ConfigError(str(e), field="solver") from e
    for key in ("base_n", "face_n", "interior_n"):
        if getattr(cfg.grid, key) < 1:
            raise ConfigError("must be >= 1", field=f"grid.{key}")

    p = cfg.params
    if "eps" in p:
        _require(p["eps"] > 0, "eps", "must be > 0")
    if "m" in p:
        _require(p["m"] >= 1, "m", "must be >= 1")
    if cfg.task == "simulate":
        _require(p["d"] >= 0, "d", "must be >= 0")
    elif cfg.task == "check-conditions":
        _require(p["delta1"] > 0, "delta1", "must be > 0")
        _require(p["delta2"] > 0, "delta2", "must be > 0")
        _require(
            p["Delta"] > max(p["delta1"], p["delta2"]),
            "Delta",
            "must exceed delta1 and delta2",
        )
    elif cfg.task == "shadow":
        _require(p["trials"] >= 1, "trials", "must be >= 1")
        _require(0 < p["d_fraction"] <= 1, "d_fraction", "must lie in (0, 1]")
        step = p["negative_control_step"]
        _require(
            step is None or 0 <= step < p["m"] - 1,
            "negative_control_step",
            "must lie in [0, m - 2]",
        )
    elif cfg.task == "stability":
        for key in ("grid_n", "K", "expansivity_K", "expansivity_pairs"):
            _require(p[key] >= 1, key, "must be >= 1")
        for key in ("monotone_pairs", "monotone_steps"):
            _require(p[key] >= 1, key, "must be >= 1")
        _require(
            0 <= p["perturbation_fraction"] < 1,
            "perturbation_fraction",
            "must lie in [0, 1)",
        )


def load_config(path: Path, task: str | None = None) -> ExperimentConfig:
    """Parse and validate a JSON experiment config.

    ``task`` fills a missing "task" key and must match a present one.
    """

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config ({e.strerror})", field=str(path)) from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}",
            field=str(path),
        ) from None
    if task is not None and isinstance(raw, dict):
        given = str(raw.setdefault("task", task)).strip().lower()
        if given != task:
            raise ConfigError(
                f"config is for task {given!r}, not {task!r}", field="task"
            )
    cfg = ExperimentConfig.from_json(raw)
    validate_config(cfg)
    return cfg
