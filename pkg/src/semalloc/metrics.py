"""Text-similarity and timeliness metrics.

BLEU and CIDEr work on token lists; sentence similarity on real feature
vectors; AoI and AoII on piecewise-constant state traces, integrated in
closed form.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np


class MetricInputError(ValueError):
    pass


def tokenize(sentence: str) -> list[str]:
    """Whitespace split + lowercase. No stemming, punctuation is kept."""
    return sentence.lower().split()


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _check_text(candidate, references, max_n) -> None:
    if not candidate:
        raise MetricInputError("candidate is empty")
    if not references:
        raise MetricInputError("at least one reference is required")
    if any(len(r) == 0 for r in references):
        raise MetricInputError("empty reference")
    if not 1 <= max_n <= len(candidate):
        raise MetricInputError(f"max_n must lie in 1..{len(candidate)}, got {max_n}")


def modified_precision(candidate: Sequence[str], references: Sequence[Sequence[str]], n: int) -> tuple[int, int]:
    """Clipped n-gram matches and total candidate n-grams."""
    cand = ngrams(candidate, n)
    max_ref: Counter = Counter()
    for ref in references:
        for gram, count in ngrams(ref, n).items():
            max_ref[gram] = max(max_ref[gram], count)
    clipped = sum(min(count, max_ref[gram]) for gram, count in cand.items())
    return clipped, sum(cand.values())


def closest_ref_length(candidate_len: int, references: Sequence[Sequence[str]]) -> int:
    # ties go to the shorter reference
    return min((abs(len(r) - candidate_len), len(r)) for r in references)[1]


def bleu(candidate: Sequence[str], references: Sequence[Sequence[str]], max_n: int = 4) -> float:
    """Sentence BLEU without smoothing.

    Geometric mean of the clipped n-gram precisions for n = 1..max_n, times
    the brevity penalty ``exp(1 - r/c)`` when the candidate (length c) is
    shorter than the closest reference length r. Any order with zero matches
    gives 0.
    """
    _check_text(candidate, references, max_n)
    log_sum = 0.0
    for n in range(1, max_n + 1):
        matches, count = modified_precision(candidate, references, n)
        if matches == 0:
            return 0.0
        log_sum += math.log(matches / count)
    c = len(candidate)
    r = closest_ref_length(c, references)
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / max_n)


def _tfidf(counts: Counter, idf: dict) -> dict:
    total = sum(counts.values())
    return {g: (c / total) * idf[g] for g, c in counts.items()}


def _cosine(u: dict, v: dict) -> float:
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    dot = sum(x * v[g] for g, x in u.items() if g in v)
    return min(1.0, dot / (nu * nv))


def cider(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
    corpus: Sequence[Sequence[str]] | None = None,
) -> float:
    """Unscaled CIDEr: mean over n of the TF-IDF cosine, averaged over references.

    Document frequencies come from ``corpus`` (defaults to the references).
    IDF is smoothed, ``ln((1 + M) / (1 + df)) + 1``, so a single reference
    still yields non-zero weights.
    """
    _check_text(candidate, references, max_n)
    docs = list(references) if corpus is None else list(corpus)
    if not docs:
        raise MetricInputError("IDF corpus is empty")
    m = len(docs)
    per_order = []
    for n in range(1, max_n + 1):
        doc_grams = [ngrams(d, n) for d in docs]
        ref_grams = [ngrams(r, n) for r in references]
        cand_grams = ngrams(candidate, n)
        vocab = set(cand_grams)
        for g in ref_grams:
            vocab.update(g)
        idf = {g: math.log((1 + m) / (1 + sum(1 for d in doc_grams if g in d))) + 1.0 for g in vocab}
        cand_vec = _tfidf(cand_grams, idf)
        sims = [_cosine(cand_vec, _tfidf(rg, idf)) for rg in ref_grams]
        per_order.append(sum(sims) / len(sims))
    return sum(per_order) / max_n


def sentence_similarity(a, b) -> float:
    """Cosine similarity of two feature vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape or a.size == 0:
        raise MetricInputError(f"vectors must be 1-D with equal length, got {a.shape} and {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise MetricInputError("vectors must be finite")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise MetricInputError("zero vector has no direction")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


# -- age metrics --------------------------------------------------------------


@dataclass(frozen=True)
class TraceEvent:
    t: float
    source: Hashable
    estimate: Hashable
    gen_time: float


class StateTrace(tuple):
    """Time-ordered events; each event's state holds until the next one.

    The first event must sit at t = 0 and fixes the initial receiver state.
    """

    def __new__(cls, events: Iterable):
        events = tuple(e if isinstance(e, TraceEvent) else TraceEvent(*e) for e in events)
        if not events:
            raise MetricInputError("trace is empty")
        if events[0].t != 0:
            raise MetricInputError("trace must start at t = 0")
        for prev, cur in zip(events, events[1:]):
            if not cur.t > prev.t:
                raise MetricInputError(f"timestamps must be strictly increasing (t={cur.t})")
        for e in events:
            if e.gen_time > e.t:
                raise MetricInputError(f"generation time {e.gen_time} is after t={e.t}")
        return super().__new__(cls, events)


def _segments(trace, horizon: float):
    """Yield ``(start, end, event)`` pieces covering [0, horizon]."""
    if not isinstance(trace, StateTrace):
        trace = StateTrace(trace)
    if horizon <= 0:
        raise MetricInputError("horizon must be positive")
    if trace[-1].t > horizon:
        raise MetricInputError(f"trace extends past the horizon ({trace[-1].t} > {horizon})")
    ends = [e.t for e in trace[1:]] + [horizon]
    for event, end in zip(trace, ends):
        if end > event.t:
            yield event.t, end, event


def aoi_at(trace, t: float) -> float:
    """Instantaneous age just after time ``t``."""
    if not isinstance(trace, StateTrace):
        trace = StateTrace(trace)
    current = None
    for e in trace:
        if e.t <= t:
            current = e
    if current is None:
        raise MetricInputError("time precedes the trace")
    return t - current.gen_time


def average_aoi(trace, horizon: float) -> float:
    """Time-average of ``t - freshest generation time`` over [0, horizon]."""
    area = 0.0
    for start, end, e in _segments(trace, horizon):
        area += (end - start) * (0.5 * (start + end) - e.gen_time)
    return area / horizon


def average_aoii(trace, horizon: float) -> float:
    """Time-average of the age of incorrect information.

    Linear time penalty, indicator error penalty: while the estimate differs
    from the source the penalty is the time since the estimate was last
    correct, otherwise zero.
    """
    area = 0.0
    wrong_since = None
    for start, end, e in _segments(trace, horizon):
        if e.source == e.estimate:
            wrong_since = None
            continue
        if wrong_since is None:
            wrong_since = start
        a, b = start - wrong_since, end - wrong_since
        area += 0.5 * (b * b - a * a)
    return area / horizon
