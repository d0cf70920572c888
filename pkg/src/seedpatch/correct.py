"""k-mer spectrum correction of substitution errors within one bin.

A k-mer is weak when it occurs fewer times than ``max(min_count, frac * c)``
where ``c`` is the largest count among the read's own k-mers. Candidate
positions are the bases entering or leaving a weak run, plus the bases at
which the count jumps by more than ``ratio`` between neighbouring k-mers
(at high depth a recurring error can clear the weak threshold). A
substitution is kept when it turns covering k-mers solid or raises rare
ones (below ``suspect_frac`` of that largest count) ``ratio``-fold, and no
covering k-mer loses solidity or drops ``ratio``-fold.
The best such substitution is applied, up to ``max_fixes`` per read. Reads
without suspicious k-mers come back untouched. A read that still holds a
weak k-mer afterwards is reported as untrusted.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

BASES = "ACGT"


@dataclass(frozen=True)
class CorrectionParams:
    k: int = 21
    frac: float = 0.02
    min_count: int = 2
    max_fixes: int = 4
    ratio: float = 4.0
    suspect_frac: float = 0.05


def count_kmers(seqs: Sequence[str], k: int) -> Counter:
    counts: Counter = Counter()
    for s in seqs:
        counts.update(s[j:j + k] for j in range(len(s) - k + 1))
    return counts


def _weak_runs(c: list[int], thr: int) -> list[tuple[int, int]]:
    runs = []
    start = None
    for j, x in enumerate(c):
        if x < thr:
            if start is None:
                start = j
        elif start is not None:
            runs.append((start, j - 1))
            start = None
    if start is not None:
        runs.append((start, len(c) - 1))
    return runs


def _candidates(c: list[int], thr: int, k: int, ratio: float) -> set[int]:
    m = len(c)
    out = set()
    for j0, j1 in _weak_runs(c, thr):
        if j0 > 0:
            out.add(j0 + k - 1)
        if j1 < m - 1:
            out.add(j1)
    for j in range(m - 1):
        if c[j + 1] * ratio < c[j]:
            out.add(j + k)
        elif c[j] * ratio < c[j + 1]:
            out.add(j)
    return out


def correct_read(seq: str, counts: Counter, params: CorrectionParams = CorrectionParams()) -> tuple[str, int]:
    """Corrected sequence and the number of substitutions made."""
    fixed, fixes, _ = _correct(seq, counts, params)
    return fixed, fixes


def _correct(seq: str, counts: Counter, params: CorrectionParams) -> tuple[str, int, bool]:
    k = params.k
    n = len(seq)
    m = n - k + 1
    if m <= 1:
        return seq, 0, True
    c = [counts[seq[j:j + k]] for j in range(m)]
    thr = max(params.min_count, int(params.frac * max(c)))
    R = params.ratio
    # solid k-mers this rare may still be a recurring error
    suspect = params.suspect_frac * max(c)
    s = list(seq)
    fixes = 0
    while fixes < params.max_fixes:
        best = None
        for i in sorted(_candidates(c, thr, k, R)):
            lo, hi = max(0, i - k + 1), min(i, m - 1)
            old = s[i]
            for b in BASES:
                if b == old:
                    continue
                s[i] = b
                window = "".join(s[lo:hi + k])
                newc = [counts[window[j:j + k]] for j in range(hi - lo + 1)]
                gain = 0
                broken = False
                for x, y in zip(c[lo:hi + 1], newc):
                    if (x >= thr and y < thr) or y * R < x:
                        broken = True
                        break
                    if y >= thr and (x < thr or (x < suspect and y >= R * x)):
                        gain += 1
                if broken or not gain:
                    continue
                score = (gain, sum(newc), -i, b)
                if best is None or score > best[0]:
                    best = (score, i, b, lo, newc)
            s[i] = old
        if best is None:
            break
        _, i, b, lo, newc = best
        s[i] = b
        c[lo:lo + len(newc)] = newc
        fixes += 1
    return "".join(s), fixes, min(c) >= thr


@dataclass
class Correction:
    seqs: list[str]
    trusted: list[bool]
    fixes: int


def correct_reads(seqs: Sequence[str], params: CorrectionParams = CorrectionParams()) -> Correction:
    """Correct every sequence against the spectrum of the whole set."""
    counts = count_kmers(seqs, params.k)
    res = Correction([], [], 0)
    for s in seqs:
        fixed, n, ok = _correct(s, counts, params)
        res.seqs.append(fixed)
        res.trusted.append(ok)
        res.fixes += n
    return res
