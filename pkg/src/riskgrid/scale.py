"""Five-level ordinal assessment scale and its negation.

Factor values and rule relevances share one scale running from
``very_low`` (1) to ``very_high`` (5).  Negation reflects a level around
the scale midpoint: ``6 - v``, so ``medium`` is its own negation.
"""
from __future__ import annotations

from enum import IntEnum


class ScaleLevel(IntEnum):
    """Ordinal five-level value with numeric image 1..5."""

    VERY_LOW = 1
    LOW = 2
    MEDIUM = 3
    HIGH = 4
    VERY_HIGH = 5

    @property
    def label(self) -> str:
        """Lowercase literal used in files, flags, and reports."""
        return self.name.lower()

    def __str__(self) -> str:
        return self.label


LEVEL_LABELS = {level.label: level for level in ScaleLevel}


def parse_level(text: str) -> ScaleLevel:
    """Map a level literal (``very_low`` .. ``very_high``) to its ScaleLevel.

    Raises ValueError for anything else.
    """
    try:
        return LEVEL_LABELS[text.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown scale level {text!r}; expected one of "
            f"{', '.join(LEVEL_LABELS)}"
        ) from None


def negate(value: ScaleLevel) -> ScaleLevel:
    """Scale reflection: very_low <-> very_high, low <-> high, medium fixed."""
    return ScaleLevel(6 - int(value))
