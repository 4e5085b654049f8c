"""Versioned prompt templates and strict JSON reply parsing.

Templates live as text files under data/prompts and use $placeholders;
they are rendered with string.Template so literal JSON braces in the
format instructions survive untouched.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from string import Template

from .errors import ParseError


@lru_cache(maxsize=None)
def _template(name: str) -> Template:
    text = resources.files("stylorisk.data.prompts").joinpath(f"{name}.txt").read_text("utf-8")
    return Template(text)


def render_prompt(name: str, **fields) -> str:
    return _template(name).substitute(**fields)


def extract_json(reply: str):
    """Parse the JSON value from a chat reply.

    Accepts either a bare JSON document or a reply with surrounding
    prose, in which case the outermost {...} or [...] span is parsed.
    """
    text = reply.strip()
    try:
        return json.loads(text)
    except (json.JSONDecodeError, ValueError):
        pass
    for opener, closer in (("{", "}"), ("[", "]")):
        start = text.find(opener)
        end = text.rfind(closer)
        if start != -1 and end > start:
            try:
                return json.loads(text[start : end + 1])
            except (json.JSONDecodeError, ValueError):
                continue
    raise ParseError(f"no JSON value found in reply: {text[:120]!r}")
