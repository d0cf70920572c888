"""Read/genome file parsing and the sequence records shared by every stage.

Sequences are plain ``str`` over ``ACGTN``: input is uppercased and any
symbol outside ``ACGT`` becomes ``N``. ``N`` is kept so real files parse, but
the overlap and alignment code always scores it as a mismatch.
"""
from __future__ import annotations

import gzip
import io
import os
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

_NON_ACGT = re.compile(r"[^ACGT]")
_COMPLEMENT = str.maketrans("ACGTN", "TGCAN")
_MATE_SUFFIX = re.compile(r"/[12]$")

FASTA_WIDTH = 80


class ParseError(ValueError):
    """Malformed FASTA/FASTQ/alignment input."""


def normalize(seq: str) -> str:
    seq = seq.upper()
    return _NON_ACGT.sub("N", seq)


def revcomp(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


def strip_mate_suffix(read_id: str) -> str:
    return _MATE_SUFFIX.sub("", read_id)


@dataclass(frozen=True, slots=True)
class ShortRead:
    id: str
    seq: str
    qual: str | None = None  # raw Phred+33 characters

    def __post_init__(self):
        if self.qual is not None and len(self.qual) != len(self.seq):
            raise ValueError(
                f"read {self.id}: quality length {len(self.qual)} != sequence length {len(self.seq)}"
            )

    def __len__(self):
        return len(self.seq)

    @property
    def phred(self) -> list[int] | None:
        if self.qual is None:
            return None
        return [ord(c) - 33 for c in self.qual]


@dataclass(frozen=True, slots=True)
class ReadPair:
    r1: ShortRead
    r2: ShortRead

    def __post_init__(self):
        if strip_mate_suffix(self.r1.id) != strip_mate_suffix(self.r2.id):
            raise ValueError(f"mate ids disagree: {self.r1.id} vs {self.r2.id}")

    @property
    def id(self) -> str:
        return strip_mate_suffix(self.r1.id)


@dataclass(frozen=True)
class ReferenceGenome:
    contigs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        names = [name for name, _ in self.contigs]
        if len(set(names)) != len(names):
            raise ValueError("contig names must be unique")
        if self.total_length <= 0:
            raise ValueError("genome is empty")

    @classmethod
    def from_records(cls, records) -> "ReferenceGenome":
        return cls(tuple((name, normalize(seq)) for name, seq in records))

    @property
    def total_length(self) -> int:
        return sum(len(seq) for _, seq in self.contigs)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.contigs]

    def __getitem__(self, name: str) -> str:
        for n, seq in self.contigs:
            if n == name:
                return seq
        raise KeyError(name)


def open_text(path, mode="rt"):
    """Open ``path`` as text, transparently handling a ``.gz`` suffix."""
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


def _iter_fasta(handle) -> Iterator[tuple[str, str, int]]:
    name = None
    header_line = 0
    chunks: list[str] = []
    for lineno, line in enumerate(handle, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if name is not None:
                if not chunks:
                    raise ParseError(f"line {header_line}: empty record '{name}'")
                yield name, "".join(chunks), header_line
            name = line[1:].split()[0] if len(line) > 1 else ""
            if not name:
                raise ParseError(f"line {lineno}: FASTA header without a name")
            header_line = lineno
            chunks = []
        else:
            if name is None:
                raise ParseError(f"line {lineno}: expected a '>' header line")
            chunks.append("".join(line.split()))
    if name is not None:
        if not chunks:
            raise ParseError(f"line {header_line}: empty record '{name}'")
        yield name, "".join(chunks), header_line


def parse_fasta(handle) -> list[tuple[str, str]]:
    return [(name, normalize(seq)) for name, seq, _ in _iter_fasta(handle)]


def read_fasta(path) -> ReferenceGenome:
    with open_text(path) as fh:
        records = parse_fasta(fh)
    if not records:
        raise ParseError(f"{path}: no FASTA records")
    return ReferenceGenome(tuple(records))


def write_fasta(path, records: Sequence[tuple[str, str]], width: int = FASTA_WIDTH) -> None:
    with open_text(path, "wt") as out:
        for rid, seq in records:
            if not rid:
                raise ValueError("FASTA record ids must be non-empty")
            out.write(f">{rid}\n")
            for i in range(0, len(seq), width):
                out.write(seq[i:i + width])
                out.write("\n")


def _iter_fastq(handle, source) -> Iterator[ShortRead]:
    while True:
        header = handle.readline()
        if not header:
            return
        if not header.strip():
            continue
        seq = handle.readline()
        plus = handle.readline()
        qual = handle.readline()
        header = header.rstrip("\r\n")
        if not header.startswith("@"):
            raise ParseError(f"{source}: expected '@' header, got {header[:40]!r}")
        rid = header[1:].split()[0] if len(header) > 1 else ""
        if not plus.startswith("+"):
            raise ParseError(f"{source}: record {rid}: missing '+' separator line")
        seq = seq.strip()
        qual = qual.strip()
        if len(seq) != len(qual):
            raise ParseError(
                f"{source}: record {rid}: quality length {len(qual)} != sequence length {len(seq)}"
            )
        yield ShortRead(rid, normalize(seq), qual)


def read_fastq(path, paired_with=None) -> Iterator[ShortRead] | Iterator[ReadPair]:
    """Stream reads from a 4-line FASTQ; pairs mates positionally if ``paired_with``."""
    if paired_with is None:
        return _single_stream(path)
    return _paired_stream(path, paired_with)


def _single_stream(path):
    with open_text(path) as fh:
        yield from _iter_fastq(fh, path)


def _paired_stream(path1, path2):
    with open_text(path1) as f1, open_text(path2) as f2:
        it1 = _iter_fastq(f1, path1)
        it2 = _iter_fastq(f2, path2)
        n = 0
        while True:
            a = next(it1, None)
            b = next(it2, None)
            if a is None or b is None:
                if a is not None or b is not None:
                    n1 = n + (a is not None) + sum(1 for _ in it1)
                    n2 = n + (b is not None) + sum(1 for _ in it2)
                    raise ParseError(f"record count mismatch {n1} vs {n2}")
                return
            n += 1
            yield ReadPair(a, b)


def format_fastq(read: ShortRead) -> str:
    qual = read.qual if read.qual is not None else "I" * len(read.seq)
    return f"@{read.id}\n{read.seq}\n+\n{qual}\n"


def write_fastq(path, reads) -> int:
    n = 0
    with open_text(path, "wt") as out:
        for read in reads:
            out.write(format_fastq(read))
            n += 1
    return n


def parse_fasta_text(text: str) -> list[tuple[str, str]]:
    return parse_fasta(io.StringIO(text))
