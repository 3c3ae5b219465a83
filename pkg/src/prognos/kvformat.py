"""Flat ``key = value`` text files used for scenarios, manifests, reports."""

from __future__ import annotations

from .exceptions import ScenarioError


def parse_kv(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` text; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def format_kv(items: dict[str, object]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in items.items())
