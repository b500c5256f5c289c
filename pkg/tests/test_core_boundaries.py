from __future__ import annotations

from pathlib import Path

NUMERIC_MODULES = [
    "frame.py",
    "torus.py",
    "profiles.py",
    "maps.py",
    "systems.py",
    "orbits.py",
    "rect.py",
    "sampling.py",
    "conditions.py",
    "wazewski.py",
    "subdivision.py",
    "shadow.py",
    "oracle.py",
    "stability.py",
]

OUTER_LAYERS = [
    "shadowtorus.cli",
    "shadowtorus.svg",
    "shadowtorus.tasks",
    "shadowtorus.config",
]


def test_numeric_modules_do_not_reference_outer_layers() -> None:
    """Hard boundary: the numerics never import the CLI, SVG, task or config layers.

    Scans source text so the test does not depend on import order.
    """

    pkg = Path(__file__).resolve().parents[1] / "shadowtorus"
    offenders: list[str] = []
    for name in NUMERIC_MODULES:
        txt = (pkg / name).read_text(encoding="utf-8")
        for layer in OUTER_LAYERS:
            if layer in txt:
                offenders.append(f"{name} -> {layer}")

    assert not offenders, f"numeric modules reference outer layers: {offenders}"


def test_only_cli_configures_logging_handlers() -> None:
    pkg = Path(__file__).resolve().parents[1] / "shadowtorus"
    offenders = [
        p.name
        for p in pkg.rglob("*.py")
        if p.name != "cli.py" and "addHandler" in p.read_text(encoding="utf-8")
    ]
    assert not offenders, f"handlers attached outside cli.py: {offenders}"
