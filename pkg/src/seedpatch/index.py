"""Exact-seed k-mer index over a reference genome and an ungapped anchor aligner.

The aligner's job is narrow: place reads that match the genome end-to-end
(exonic reads) and *fail* on reads spanning a splice junction, so that the
localization stage can rescue them by their split parts.
"""
from __future__ import annotations

import bisect
import re
from typing import Iterator, NamedTuple

from .seqio import ParseError, ReferenceGenome, open_text, revcomp

FORWARD = "+"
REVERSE = "-"

_ACGT_RUN = re.compile(r"[ACGT]+")


class AnchorHit(NamedTuple):
    contig: str
    pos: int  # 0-based leftmost coordinate on the forward strand
    strand: str
    query_id: str = ""


class KmerIndex:
    """Forward-strand ``w``-mer occurrence index.

    Occurrences are stored as offsets into the concatenated genome; windows
    that cross a contig boundary or contain a non-ACGT base are not indexed.
    ``w``-mers seen more than ``max_occ`` times are dropped and remembered in
    ``overrepresented``.
    """

    def __init__(self, genome: ReferenceGenome, w: int = 12, max_occ: int = 64):
        if not 1 <= w <= 32:
            raise ValueError(f"seed length w={w} outside 1..32")
        if max_occ < 1:
            raise ValueError("max_occ must be positive")
        longest = max(len(seq) for _, seq in genome.contigs)
        if w > longest:
            raise ValueError(f"seed length w={w} exceeds the longest contig ({longest})")
        self.genome = genome
        self.w = w
        self.max_occ = max_occ
        self.names = genome.names
        self.starts = []
        offset = 0
        for _, seq in genome.contigs:
            self.starts.append(offset)
            offset += len(seq)
        self.ends = self.starts[1:] + [offset]
        self.text = "".join(seq for _, seq in genome.contigs)
        self._first: dict[str, int] = {}
        self._multi: dict[str, list[int]] = {}
        self.overrepresented: set[str] = set()
        self._build()

    def _build(self):
        w, text = self.w, self.text
        first, multi = self._first, self._multi
        for start, end in zip(self.starts, self.ends):
            for m in _ACGT_RUN.finditer(text, start, end):
                for g in range(m.start(), m.end() - w + 1):
                    km = text[g:g + w]
                    prev = first.setdefault(km, g)
                    if prev != g:
                        lst = multi.get(km)
                        if lst is None:
                            multi[km] = [prev, g]
                        else:
                            lst.append(g)
        for km, lst in list(multi.items()):
            if len(lst) > self.max_occ:
                self.overrepresented.add(km)
                del multi[km]
                del first[km]

    def _offsets(self, kmer: str) -> list[int]:
        lst = self._multi.get(kmer)
        if lst is not None:
            return lst
        g = self._first.get(kmer)
        return [] if g is None else [g]

    def locate(self, g: int) -> tuple[int, int]:
        """Map a concatenated offset to (contig index, contig position)."""
        ci = bisect.bisect_right(self.starts, g) - 1
        return ci, g - self.starts[ci]

    def occurrences(self, kmer: str) -> list[tuple[str, int]]:
        out = []
        for g in self._offsets(kmer):
            ci, pos = self.locate(g)
            out.append((self.names[ci], pos))
        return out

    def __contains__(self, kmer: str) -> bool:
        return kmer in self._first

    def __len__(self):
        return len(self._first)

    def _seed_offsets(self, n: int) -> list[int]:
        w = self.w
        offs = list(range(0, n - w + 1, w))
        if offs and offs[-1] != n - w:
            offs.append(n - w)
        return offs

    def _best_on_strand(self, query: str, max_mismatch: int, best):
        n = len(query)
        text = self.text
        w = self.w
        tried = set()
        for off in self._seed_offsets(n):
            for occ in self._offsets(query[off:off + w]):
                g = occ - off
                if g in tried:
                    continue
                tried.add(g)
                ci = bisect.bisect_right(self.starts, occ) - 1
                if g < self.starts[ci] or g + n > self.ends[ci]:
                    continue
                window = text[g:g + n]
                if window == query:
                    mm = 0
                else:
                    mm = 0
                    for a, b in zip(query, window):
                        if a != b or a == "N":
                            mm += 1
                            if mm > max_mismatch:
                                break
                    if mm > max_mismatch:
                        continue
                if best is None or (mm, g) < (best[0], best[1]):
                    best = (mm, g)
        return best

    def align(self, query: str, max_mismatch: int = 2, query_id: str = "") -> AnchorHit | None:
        """Best ungapped end-to-end placement of ``query`` or its reverse complement.

        Fewest mismatches wins, then contig order, then position, then the
        forward strand. Candidate positions come from the query's disjoint
        ``w``-mers, so a placement with ``<= max_mismatch`` mismatches is always
        seen when ``len(query) >= (max_mismatch + 1) * w`` and none of its seeds
        is over-represented.
        """
        if len(query) < self.w:
            raise ValueError(f"query of length {len(query)} shorter than seed length {self.w}")
        fwd = self._best_on_strand(query, max_mismatch, None)
        rev = self._best_on_strand(revcomp(query), max_mismatch, None)
        if fwd is None and rev is None:
            return None
        if rev is None or (fwd is not None and (fwd[0], fwd[1]) <= (rev[0], rev[1])):
            mm, g = fwd
            strand = FORWARD
        else:
            mm, g = rev
            strand = REVERSE
        ci, pos = self.locate(g)
        return AnchorHit(self.names[ci], pos, strand, query_id)


def build_index(genome: ReferenceGenome, w: int = 12, max_occ: int = 64) -> KmerIndex:
    return KmerIndex(genome, w, max_occ)


def align(index: KmerIndex, query: str, max_mismatch: int = 2, query_id: str = "") -> AnchorHit | None:
    return index.align(query, max_mismatch, query_id)


FLAG_UNMAPPED = 0x4
FLAG_REVERSE = 0x10
FLAG_MATE1 = 0x40
FLAG_MATE2 = 0x80
FLAG_SECONDARY = 0x100
FLAG_SUPPLEMENTARY = 0x800


class AlignmentRecord(NamedTuple):
    hit: AnchorHit
    flag: int


def iter_alignment_records(path) -> Iterator[AlignmentRecord]:
    with open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("@"):
                continue
            fields = line.split("\t")
            if len(fields) < 4:
                raise ParseError(f"{path}: line {lineno}: expected at least 4 tab-separated columns")
            try:
                flag = int(fields[1])
                pos1 = int(fields[3])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-integer flag or position") from None
            if flag & FLAG_UNMAPPED:
                continue
            strand = REVERSE if flag & FLAG_REVERSE else FORWARD
            yield AlignmentRecord(AnchorHit(fields[2], pos1 - 1, strand, fields[0]), flag)


def ingest_alignments(path) -> Iterator[AnchorHit]:
    """Mapped records of a SAM-compatible file as 0-based anchor hits."""
    for rec in iter_alignment_records(path):
        yield rec.hit
