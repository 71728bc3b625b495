"""Bundled example programs (fig1 through fig4)."""

from importlib import resources
from pathlib import Path

from .. import lang

NAMES = ("fig1", "fig2", "fig3", "fig4")


def path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown corpus program {name!r}")
    return Path(str(resources.files(__package__) / f"{name}.amc"))


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def load(name: str) -> lang.Program:
    return lang.parse(source(name), name=f"{name}.amc")
