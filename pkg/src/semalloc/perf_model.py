"""Semantic performance of the text encoder versus its output dimension.

The table maps the per-word feature width D (1..16) to the sentence
similarity and 1-gram BLEU score measured for the case-study encoder.  It is
also shipped as ``data/fig5b_curves.csv``; both copies must stay identical.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Optional

CURVE_VERSION = 1
CSV_HEADER = ("dimension", "similarity", "bleu_1gram")

# dimension -> (sentence similarity, 1-gram BLEU)
_POINTS: dict[int, tuple[float, float]] = {
    1: (0.39550235, 0.0944817),
    2: (0.40009948, 0.09667912),
    3: (0.40945041, 0.09386748),
    4: (0.41866887, 0.10047062),
    5: (0.42247792, 0.10116262),
    6: (0.42490115, 0.10300542),
    7: (0.4295931, 0.11076793),
    8: (0.43368545, 0.11739845),
    9: (0.43733177, 0.12781957),
    10: (0.4519554, 0.15357989),
    11: (0.47728359, 0.1940025),
    12: (0.51547686, 0.27020956),
    13: (0.55437698, 0.34242301),
    14: (0.61085957, 0.44607532),
    15: (0.7460733, 0.65054165),
    16: (0.86169747, 0.82109432),
}


class DimensionError(ValueError):
    """Output dimension outside the supported range."""


@dataclass(frozen=True)
class PerfCurve:
    points: Mapping[int, tuple[float, float]]

    def __post_init__(self):
        if sorted(self.points) != list(range(1, 17)):
            raise ValueError("curve must define exactly dimensions 1..16")
        sims = [self.points[d][0] for d in range(1, 17)]
        for d, (s, b) in self.points.items():
            if not (0.0 <= s <= 1.0 and 0.0 <= b <= 1.0):
                raise ValueError(f"dimension {d}: scores must lie in [0, 1]")
        if any(b <= a for a, b in zip(sims, sims[1:])):
            raise ValueError("similarity must be strictly increasing in D")

    @property
    def max_dimension(self) -> int:
        return max(self.points)


DEFAULT_CURVE = PerfCurve(dict(_POINTS))


def lookup(curve: PerfCurve, d: int) -> tuple[float, float]:
    """Return ``(similarity, bleu)`` at output dimension ``d``."""
    if isinstance(d, bool) or not isinstance(d, int) or d not in curve.points:
        raise DimensionError(f"dimension must be an integer in 1..{curve.max_dimension}, got {d!r}")
    return curve.points[d]


def curve_rows(curve: PerfCurve = DEFAULT_CURVE) -> list[tuple[int, float, float]]:
    return [(d, *curve.points[d]) for d in sorted(curve.points)]


def load_curve_csv(text: Optional[str] = None) -> PerfCurve:
    """Parse a curve CSV; with no argument, read the packaged asset."""
    if text is None:
        text = resources.files("semalloc").joinpath("data/fig5b_curves.csv").read_text("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected curve header {header}")
    return PerfCurve({int(d): (float(s), float(b)) for d, s, b in reader})


@dataclass(frozen=True)
class PayloadModel:
    """Bits needed to send one sentence of ``words`` words at dimension d."""

    words: int = 32
    bits_per_feature: int = 32
    max_dimension: int = 16

    def __post_init__(self):
        if self.words < 1 or self.bits_per_feature < 1:
            raise ValueError("words and bits_per_feature must be >= 1")
        if not 1 <= self.max_dimension <= 16:
            raise ValueError("max_dimension must lie in 1..16")


def payload_bits(model: PayloadModel, d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, int) or not 1 <= d <= model.max_dimension:
        raise DimensionError(f"dimension must be an integer in 1..{model.max_dimension}, got {d!r}")
    return model.words * d * model.bits_per_feature


def feasible_dimension(model: PayloadModel, bit_budget: float) -> Optional[int]:
    """Largest dimension whose payload fits in ``bit_budget``.

    ``None`` means the device cannot send even a 1-dimensional encoding.
    """
    if bit_budget < 0:
        raise ValueError("bit budget must be non-negative")
    per_dim = model.words * model.bits_per_feature
    d = min(int(bit_budget // per_dim), model.max_dimension)
    return d if d >= 1 else None
