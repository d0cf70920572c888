"""Contig precision and transcript reconstruction accuracy against ground truth."""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .seqio import revcomp

PREFILTER_K = 16


def _codes(seq: str) -> np.ndarray:
    arr = np.frombuffer(seq.encode(), dtype=np.uint8).astype(np.int16)
    # N never matches, not even another N
    return np.where(arr == ord("N"), -1, arr)


def map_contig(contig: str, transcript: str) -> tuple[int, int, int]:
    """Matches, mismatches and gap length of the best semi-global alignment.

    The contig is aligned end to end while the transcript's flanks are free.
    All edits cost 1; among equal-cost alignments the one with the most
    matches wins, then the one with fewest contig bases opposite gaps.
    """
    n, m = len(contig), len(transcript)
    if n == 0 or m == 0:
        raise ValueError("map_contig needs non-empty sequences")
    if "N" not in contig and contig in transcript:
        return n, 0, 0
    # score = cost*B^2 - matches*B + insertions, minimized; digits decode at the end
    B = n + 1
    B2 = B * B
    a = _codes(contig)
    b = _codes(transcript)
    cols = np.arange(m + 1, dtype=np.int64) * B2
    prev = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        eq = b == a[i]
        diag = prev[:-1] + np.where(eq, -B, B2)
        cur = np.empty(m + 1, dtype=np.int64)
        cur[0] = prev[0] + B2 + 1
        cur[1:] = np.minimum(diag, prev[1:] + B2 + 1)
        # deletions run along the row: cur[j] = min_{j'<=j} cur[j'] + (j - j') * B2
        cur = np.minimum.accumulate(cur - cols) + cols
        prev = cur
    best = int(prev.min())
    shifted = best + n * B
    cost, rest = divmod(shifted, B2)
    unmatched, ins = divmod(rest, B)
    M = n - unmatched
    N = n - M - ins
    dels = cost - N - ins
    return M, N, ins + dels


def _kmers(seq: str, k: int, step: int = 1) -> set[str]:
    return {seq[i:i + k] for i in range(0, len(seq) - k + 1, step)}


@dataclass
class EvalResult:
    precision: float
    accuracy: float
    contig_mapped: dict[str, bool]
    contig_best: dict[str, tuple[str | None, float]]
    reconstructed: dict[str, bool]
    identity: dict[str, float]
    eligible: list[str]
    deciles: list[dict] = field(default_factory=list)

    @property
    def n_contigs(self) -> int:
        return len(self.contig_mapped)

    def rows(self) -> list[tuple[str, str]]:
        return [
            ("contigs", str(self.n_contigs)),
            ("mapped_contigs", str(sum(self.contig_mapped.values()))),
            ("precision", f"{self.precision:.4f}"),
            ("transcripts_eligible", str(len(self.eligible))),
            ("transcripts_reconstructed", str(sum(self.reconstructed[t] for t in self.eligible))),
            ("accuracy", f"{self.accuracy:.4f}"),
        ]


class _TranscriptIndex:
    def __init__(self, transcripts: Sequence[tuple[str, str]], k: int):
        self.k = k
        self.postings: dict[str, set[int]] = defaultdict(set)
        for t, (_, seq) in enumerate(transcripts):
            for km in _kmers(seq, k):
                self.postings[km].add(t)

    def votes(self, seq: str) -> Counter:
        c: Counter = Counter()
        for km in _kmers(seq, self.k):
            for t in self.postings.get(km, ()):
                c[t] += 1
        return c


def evaluate(contigs: Sequence[tuple[str, str]], transcripts: Sequence[tuple[str, str]],
             coverage: dict[str, float] | None = None, min_coverage: float = 5.0,
             precision_cutoff: float = 0.9, identity_cutoff: float = 0.9,
             max_candidates: int = 8) -> EvalResult:
    """Score contigs against reference transcripts.

    A contig is mapped when M/(M+N+G) reaches ``precision_cutoff`` for some
    transcript (contig aligned end to end). A transcript is reconstructed
    when some contig gives M/|t| of at least ``identity_cutoff`` with the
    transcript aligned end to end. Only transcripts with mean coverage of at
    least ``min_coverage`` count toward accuracy.
    """
    coverage = coverage or {}
    k = PREFILTER_K
    tindex = _TranscriptIndex(transcripts, k)
    # candidate (contig orientation, transcript) pairs come from shared k-mers
    oriented: list[tuple[str, str]] = []
    cand_t: dict[int, list[int]] = {}
    for c, (cid, seq) in enumerate(contigs):
        fwd, rev = tindex.votes(seq), tindex.votes(revcomp(seq))
        use_rev = sum(rev.values()) > sum(fwd.values())
        oriented.append((cid, revcomp(seq) if use_rev else seq))
        votes = rev if use_rev else fwd
        cand_t[c] = [t for t, _ in sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))[:max_candidates]]

    contig_mapped, contig_best = {}, {}
    for c, (cid, seq) in enumerate(oriented):
        best_ratio, best_t = 0.0, None
        for t in cand_t[c]:
            M, N, G = map_contig(seq, transcripts[t][1])
            ratio = M / (M + N + G)
            if ratio > best_ratio:
                best_ratio, best_t = ratio, transcripts[t][0]
            if ratio >= 1.0:
                break
        contig_mapped[cid] = best_ratio >= precision_cutoff
        contig_best[cid] = (best_t, best_ratio)

    by_transcript: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for c, ts in cand_t.items():
        for rank, t in enumerate(ts):
            by_transcript[t].append((rank, c))
    reconstructed, identity = {}, {}
    for t, (tid, tseq) in enumerate(transcripts):
        best = 0.0
        for _, c in sorted(by_transcript.get(t, [])):
            M, _, _ = map_contig(tseq, oriented[c][1])
            best = max(best, M / len(tseq))
            if best >= identity_cutoff:
                break
        identity[tid] = best
        reconstructed[tid] = best >= identity_cutoff

    eligible = [tid for tid, _ in transcripts if coverage.get(tid, float("inf")) >= min_coverage]
    precision = sum(contig_mapped.values()) / len(contig_mapped) if contig_mapped else 0.0
    accuracy = sum(reconstructed[t] for t in eligible) / len(eligible) if eligible else 0.0
    return EvalResult(precision, accuracy, contig_mapped, contig_best, reconstructed, identity,
                      eligible, coverage_deciles(eligible, coverage, reconstructed))


def coverage_deciles(tids: Sequence[str], coverage: dict[str, float], reconstructed: dict[str, bool]) -> list[dict]:
    """Accuracy per expression decile, lowest coverage first."""
    order = sorted(tids, key=lambda t: (coverage.get(t, 0.0), t))
    n = len(order)
    rows = []
    for d in range(10):
        members = order[d * n // 10:(d + 1) * n // 10]
        hit = sum(reconstructed[t] for t in members)
        covs = [coverage.get(t, 0.0) for t in members]
        rows.append({
            "decile": d + 1,
            "transcripts": len(members),
            "reconstructed": hit,
            "accuracy": hit / len(members) if members else float("nan"),
            "min_coverage": min(covs) if covs else float("nan"),
            "max_coverage": max(covs) if covs else float("nan"),
        })
    return rows


def write_metrics(path, result: EvalResult):
    with open(path, "w") as fh:
        fh.write("decile\ttranscripts\treconstructed\taccuracy\tmin_coverage\tmax_coverage\n")
        for r in result.deciles:
            fh.write(f"{r['decile']}\t{r['transcripts']}\t{r['reconstructed']}\t{r['accuracy']:.4f}\t"
                     f"{r['min_coverage']:.2f}\t{r['max_coverage']:.2f}\n")
        fh.write(f"all\t{len(result.eligible)}\t{sum(result.reconstructed[t] for t in result.eligible)}\t"
                 f"{result.accuracy:.4f}\t\t\n")
        fh.write(f"# precision\t{result.precision:.4f}\tcontigs\t{result.n_contigs}\t"
                 f"mapped\t{sum(result.contig_mapped.values())}\n")
