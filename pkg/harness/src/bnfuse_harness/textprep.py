"""Text preprocessing applied before inference: the fusion engine never sees
raw text, so all cleanup lives here."""

from __future__ import annotations

import re

# zero-width space, non-joiner, joiner, word joiner, BOM/zero-width no-break
_ZERO_WIDTH = re.compile("[​‌‍⁠﻿]")
_WHITESPACE = re.compile(r"\s+")


def clean_text(text: str | None) -> str:
    """Delete zero-width characters, collapse whitespace runs, strip ends."""
    if text is None:
        return ""
    return _WHITESPACE.sub(" ", _ZERO_WIDTH.sub("", text)).strip()


def is_empty(text: str | None) -> bool:
    return clean_text(text) == ""
