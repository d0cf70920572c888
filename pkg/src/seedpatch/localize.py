"""Stage I: split-align-anchor localization of reads and binning into loci."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .index import FORWARD, AnchorHit, KmerIndex
from .seqio import ReadPair, ShortRead, revcomp, strip_mate_suffix

log = logging.getLogger(__name__)

WHOLE = "whole-aligned"
PART = "part-anchored"


def split(read: ShortRead | str, parts: int) -> list[str]:
    """Cut a read into 2 or 3 near-equal consecutive pieces, longer pieces first."""
    seq = read.seq if isinstance(read, ShortRead) else read
    if parts not in (2, 3):
        raise ValueError("reads are split into 2 or 3 parts")
    n = len(seq)
    if n < parts:
        raise ValueError(f"cannot split a read of length {n} into {parts} parts")
    base, extra = divmod(n, parts)
    out = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append(seq[start:start + size])
        start += size
    return out


@dataclass
class LocalizedRead:
    read: ShortRead | ReadPair
    anchor: AnchorHit
    origin: str  # WHOLE or PART
    part: int | None = None  # 1-based index in the split tuple when part-anchored
    mate: int | None = None  # which mate carried the anchor (paired reads)

    @property
    def id(self) -> str:
        return self.read.id

    def oriented(self) -> list[tuple[str, str]]:
        """(id, sequence) of every read sequence, turned onto the forward genome strand.

        Mates of a pair come off opposite strands, so the mate that did not
        carry the anchor is flipped the other way.
        """
        fwd = self.anchor.strand == FORWARD
        if isinstance(self.read, ShortRead):
            seq = self.read.seq if fwd else revcomp(self.read.seq)
            return [(self.read.id, seq)]
        r1, r2 = self.read.r1, self.read.r2
        if self.mate == 2:
            fwd = not fwd
        s1 = r1.seq if fwd else revcomp(r1.seq)
        s2 = revcomp(r2.seq) if fwd else r2.seq
        return [(r1.id, s1), (r2.id, s2)]


@dataclass
class Bin:
    locus_id: int
    contig: str
    start: int
    end: int
    reads: list[LocalizedRead] = field(default_factory=list)

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end

    def sequences(self) -> list[tuple[str, str]]:
        out = []
        for lr in self.reads:
            out.extend(lr.oriented())
        return out


@dataclass
class LocalizationReport:
    total: int = 0
    whole_aligned: int = 0
    part_anchored: int = 0
    unlocalized: int = 0
    discordant_pairs: int = 0
    bins: int = 0
    unlocalized_reads: list = field(default_factory=list)

    def rows(self) -> list[tuple[str, int]]:
        return [
            ("reads", self.total),
            ("whole_aligned", self.whole_aligned),
            ("part_anchored", self.part_anchored),
            ("unlocalized", self.unlocalized),
            ("discordant_pairs", self.discordant_pairs),
            ("bins", self.bins),
        ]


def _align_part(index: KmerIndex, seq: str, max_mismatch: int) -> AnchorHit | None:
    if len(seq) < index.w:
        return None
    return index.align(seq, max_mismatch)


def localize_single(reads: Iterable[ShortRead], index: KmerIndex, cfg,
                    hits: Mapping[str, AnchorHit] | None = None):
    """Localize single-end reads; returns (localized reads, report).

    ``hits`` replaces the built-in whole-read alignment (ingested records keyed
    by read id); split parts are always aligned with ``index``.
    """
    report = LocalizationReport()
    localized: list[LocalizedRead] = []
    leftover: list[ShortRead] = []
    for read in reads:
        report.total += 1
        if hits is not None:
            hit = hits.get(read.id) or hits.get(strip_mate_suffix(read.id))
        elif len(read.seq) >= index.w:
            hit = index.align(read.seq, cfg.max_mismatch)
        else:
            hit = None
        if hit is not None:
            localized.append(LocalizedRead(read, hit._replace(query_id=read.id), WHOLE))
            report.whole_aligned += 1
        else:
            leftover.append(read)
    for read in leftover:
        anchored = None
        if len(read.seq) >= 3:
            for part_no, part in enumerate(split(read, 3), 1):
                hit = _align_part(index, part, cfg.max_mismatch_part)
                if hit is not None:
                    anchored = LocalizedRead(read, hit._replace(query_id=read.id), PART, part=part_no)
                    break
        if anchored is None:
            report.unlocalized += 1
            report.unlocalized_reads.append(read)
        else:
            report.part_anchored += 1
            localized.append(anchored)
    return localized, report


def _concordant(a: AnchorHit, b: AnchorHit, d: int) -> bool:
    return a.contig == b.contig and abs(a.pos - b.pos) <= d


def localize_paired(pairs: Iterable[ReadPair], index: KmerIndex, cfg,
                    hits: Mapping[tuple[str, int], AnchorHit] | None = None):
    """Localize read pairs: either mate aligned whole, else any of the four half-mates.

    ``hits`` maps (pair id, mate number) to an ingested whole-read hit.
    """
    report = LocalizationReport()
    localized: list[LocalizedRead] = []
    leftover: list[ReadPair] = []
    for pair in pairs:
        report.total += 1
        if hits is not None:
            h1 = hits.get((pair.id, 1))
            h2 = hits.get((pair.id, 2))
        else:
            h1 = index.align(pair.r1.seq, cfg.max_mismatch) if len(pair.r1.seq) >= index.w else None
            h2 = index.align(pair.r2.seq, cfg.max_mismatch) if len(pair.r2.seq) >= index.w else None
        if h1 is not None:
            if h2 is not None and not _concordant(h1, h2, cfg.d):
                report.discordant_pairs += 1
            localized.append(LocalizedRead(pair, h1._replace(query_id=pair.id), WHOLE, mate=1))
            report.whole_aligned += 1
        elif h2 is not None:
            localized.append(LocalizedRead(pair, h2._replace(query_id=pair.id), WHOLE, mate=2))
            report.whole_aligned += 1
        else:
            leftover.append(pair)
    for pair in leftover:
        anchored = None
        parts = []
        for mate_no, mate in ((1, pair.r1), (2, pair.r2)):
            if len(mate.seq) >= 2:
                parts.extend((mate_no, p) for p in split(mate, 2))
        for part_no, (mate_no, part) in enumerate(parts, 1):
            hit = _align_part(index, part, cfg.max_mismatch_part)
            if hit is not None:
                anchored = LocalizedRead(pair, hit._replace(query_id=pair.id), PART,
                                         part=part_no, mate=mate_no)
                break
        if anchored is None:
            report.unlocalized += 1
            report.unlocalized_reads.append(pair)
        else:
            report.part_anchored += 1
            localized.append(anchored)
    return localized, report


def bin_reads(localized: list[LocalizedRead], d: int,
              contig_order: list[str] | None = None) -> list[Bin]:
    """Sort by (contig, anchor position) and cut wherever consecutive positions differ by more than ``d``."""
    if d <= 0:
        raise ValueError("intergenic distance d must be positive")
    if not localized:
        return []
    rank = {name: i for i, name in enumerate(contig_order or [])}
    fallback = len(rank)

    def key(lr):
        c = lr.anchor.contig
        return (rank.get(c, fallback), c, lr.anchor.pos)

    ordered = sorted(localized, key=key)
    bins: list[Bin] = []
    cur = None
    prev = None
    for lr in ordered:
        a = lr.anchor
        if cur is None or a.contig != prev.contig or a.pos - prev.pos > d:
            cur = Bin(len(bins), a.contig, a.pos, a.pos, [])
            bins.append(cur)
        cur.reads.append(lr)
        cur.end = a.pos
        prev = a
    return bins
