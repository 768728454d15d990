"""Bundled case studies. ``email`` is the e-mail client product line."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..productline import Interaction, ProductLine, load_manifest

BUNDLES = ("email",)


def bundle_path(name: str = "email") -> Path:
    if name not in BUNDLES:
        raise KeyError(f"unknown case study {name!r}; available: {', '.join(BUNDLES)}")
    return Path(str(resources.files(__package__).joinpath(name)))


def load_email_line() -> ProductLine:
    return load_manifest(bundle_path("email"))


def expected_interactions(line: ProductLine | None = None) -> list[Interaction]:
    """Documented interactions of the e-mail line, ordered by id."""
    line = line or load_email_line()
    return sorted(line.interactions, key=lambda it: it.id)
