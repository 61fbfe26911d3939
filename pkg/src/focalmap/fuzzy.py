"""LCS-ratio string similarity on an integer 0..100 scale."""

from __future__ import annotations

from collections.abc import Iterable
from typing import Any, TypeVar

from rapidfuzz.distance import LCSseq

T = TypeVar("T")

METHOD_CUTOFF = 50


def similarity(a: str, b: str) -> int:
    """``round_half_up(100 * 2 * LCS(a, b) / (len(a) + len(b)))``; two empty strings score 100."""
    total = len(a) + len(b)
    if total == 0:
        return 100
    lcs = LCSseq.similarity(a, b)
    # floor(200*lcs/total + 1/2) in exact integer arithmetic
    return (400 * lcs + total) // (2 * total)


def best_match(
    query: str, candidates: Iterable[tuple[str, T]], cutoff: int = METHOD_CUTOFF
) -> tuple[str, T, int] | None:
    """Highest-scoring ``(key, payload)`` with score >= *cutoff*; first listed wins ties."""
    if not 0 <= cutoff <= 100:
        raise ValueError(f"cutoff must lie in [0, 100], got {cutoff}")
    best: tuple[str, Any, int] | None = None
    for key, payload in candidates:
        score = similarity(query, key)
        if score >= cutoff and (best is None or score > best[2]):
            best = (key, payload, score)
    return best
