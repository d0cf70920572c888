"""Suffix-prefix overlap, merger and cover, exact or error-tolerant.

Error tolerance follows one rule everywhere: a window of length ``n`` may
hold at most ``floor(e1 * n)`` disagreeing positions and no run of more than
``e2`` consecutive ones. ``N`` never agrees with anything, itself included.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import NamedTuple, Sequence


@dataclass(frozen=True)
class OverlapParams:
    k: int = 25
    e1: float = 0.02
    e2: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("minimum overlap k must be >= 1")
        if not 0 <= self.e1 < 0.5:
            raise ValueError("error rate e1 must lie in [0, 0.5)")
        if self.e2 < 0:
            raise ValueError("contiguous error cap e2 must be >= 0")

    def budget(self, n: int) -> int:
        # tolerate float noise such as 0.29 * 100 == 28.999999999999996
        return math.floor(self.e1 * n + 1e-9)

    @property
    def exact(self) -> bool:
        return self.budget(10**9) == 0


EXACT = OverlapParams(k=1, e1=0.0, e2=0)


class OverlapResult(NamedTuple):
    l_o: int
    mismatches: int


def count_mismatches(a: str, b: str, max_err: int, max_run: int) -> int:
    """Mismatches between equal-length ``a`` and ``b``, or -1 past either bound."""
    if a == b and "N" not in a:
        return 0
    if max_err == 0:
        return -1
    errs = run = 0
    for x, y in zip(a, b):
        if x != y or x == "N":
            errs += 1
            run += 1
            if errs > max_err or run > max_run:
                return -1
        else:
            run = 0
    return errs


def window_ok(a: str, b: str, params: OverlapParams) -> bool:
    return count_mismatches(a, b, params.budget(len(a)), params.e2) >= 0


def suffix_prefix(P: str, Q: str, params: OverlapParams) -> OverlapResult:
    """Largest ``l`` >= k with P's length-``l`` suffix matching Q's prefix."""
    k = params.k
    for l_o in range(min(len(P), len(Q)), k - 1, -1):
        mm = count_mismatches(P[len(P) - l_o:], Q[:l_o], params.budget(l_o), params.e2)
        if mm >= 0:
            return OverlapResult(l_o, mm)
    return OverlapResult(0, 0)


def overlap(P: str, Q: str, params: OverlapParams) -> OverlapResult:
    """Signed overlap: positive when P's suffix meets Q's prefix, negative for the reverse."""
    res = suffix_prefix(P, Q, params)
    if res.l_o:
        return res
    res = suffix_prefix(Q, P, params)
    if res.l_o:
        return OverlapResult(-res.l_o, res.mismatches)
    return OverlapResult(0, 0)


def merge(P: str, Q: str, l_o: int, params: OverlapParams | None = None) -> str:
    """``P`` followed by what ``Q`` adds past a length-``l_o`` overlap.

    Inside the overlapped window P's bases are kept.
    """
    if l_o <= 0:
        raise ValueError("merge needs a positive overlap length")
    if l_o > min(len(P), len(Q)):
        raise ValueError(f"overlap {l_o} exceeds min(|P|, |Q|) = {min(len(P), len(Q))}")
    return P + Q[l_o:]


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    base, extra = divmod(n, parts)
    out = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append((start, size))
        start += size
    return out


def _find_all(text: str, pattern: str):
    i = text.find(pattern)
    while i >= 0:
        yield i
        i = text.find(pattern, i + 1)


def cover(S_prime: str, S: str, params: OverlapParams) -> int | None:
    """Smallest 0-based offset at which ``S_prime`` sits inside ``S``, or None.

    Candidates come from splitting ``S_prime`` into ``budget + 1`` disjoint
    pieces: any qualifying placement leaves at least one piece error-free.
    """
    n = len(S_prime)
    if n > len(S):
        return None
    if n == 0:
        return 0
    budget = params.budget(n)
    if budget == 0:
        if "N" in S_prime:
            return None
        i = S.find(S_prime)
        return None if i < 0 else i
    last = len(S) - n
    candidates = set()
    for start, size in _chunks(n, budget + 1):
        piece = S_prime[start:start + size]
        for hit in _find_all(S, piece):
            i = hit - start
            if 0 <= i <= last:
                candidates.add(i)
    for i in sorted(candidates):
        if count_mismatches(S_prime, S[i:i + n], budget, params.e2) >= 0:
            return i
    return None


def ext_right(P: str, T: Sequence[str], params: OverlapParams) -> tuple[int, int] | None:
    """Index and overlap of the read in ``T`` that lengthens ``P`` the most to the right.

    Among reads whose prefix overlaps P's suffix by >= k, the one adding the
    most bases wins; ties go to the earliest read. Reads that would add
    nothing are never chosen.
    """
    best = None
    best_gain = 0
    for idx, t in enumerate(T):
        l_o = suffix_prefix(P, t, params).l_o
        if l_o == 0:
            continue
        gain = len(t) - l_o
        if gain > best_gain:
            best, best_gain = (idx, l_o), gain
    return best


def ext_left(P: str, T: Sequence[str], params: OverlapParams) -> tuple[int, int] | None:
    best = None
    best_gain = 0
    for idx, t in enumerate(T):
        l_o = suffix_prefix(t, P, params).l_o
        if l_o == 0:
            continue
        gain = len(t) - l_o
        if gain > best_gain:
            best, best_gain = (idx, l_o), gain
    return best


@lru_cache(maxsize=256)
def seed_length(params: OverlapParams, min_len: int, max_len: int) -> int:
    """Largest piece length q <= k for which disjoint q-pieces stay pigeonhole-complete.

    Every window of length ``n`` in ``[min(k, min_len), max_len]`` must contain
    at least ``budget(n) + 1`` whole pieces at offsets 0, q, 2q, ...
    """
    lo = max(1, min(params.k, min_len))
    for q in range(min(params.k, lo), 0, -1):
        if all(n // q >= params.budget(n) + 1 for n in range(lo, max_len + 1)):
            return q
    return 1
