"""Bundled example sentences as f-structure / lexicon file pairs."""

from pathlib import Path

DIR = Path(__file__).parent

NAMES = ("basic", "coordinate", "quantified", "noncoordinate", "intensional")


def paths(name: str) -> tuple[Path, Path]:
    if name not in NAMES:
        raise KeyError(f"no corpus pair named {name!r}")
    return DIR / f"{name}.fs", DIR / f"{name}.lex"
