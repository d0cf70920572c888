"""Toy gene models, synthetic genomes and RNA-seq reads with ground truth."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import yaml

from .config import ConfigError
from .seqio import ReadPair, ReferenceGenome, ShortRead, revcomp

BASES = "ACGT"
DEFAULT_SPACER = 2000


@dataclass(frozen=True)
class GeneModel:
    gene_id: str
    contig: str
    exons: tuple[tuple[int, int], ...]  # 0-based half-open genomic intervals
    isoforms: tuple[tuple[int, ...], ...]  # 0-based exon indices
    abundances: tuple[int, ...]

    def __post_init__(self):
        if not self.exons:
            raise ConfigError(f"{self.gene_id}: no exons")
        prev = -1
        for s, e in self.exons:
            if s < 0 or e <= s or s < prev:
                raise ConfigError(f"{self.gene_id}: exons must be non-empty, non-overlapping and ascending")
            prev = e
        if not self.isoforms:
            raise ConfigError(f"{self.gene_id}: no isoforms")
        if len(self.abundances) != len(self.isoforms):
            raise ConfigError(f"{self.gene_id}: need one abundance per isoform")
        for iso in self.isoforms:
            if not iso:
                raise ConfigError(f"{self.gene_id}: empty isoform")
            for a, b in zip(iso, iso[1:]):
                if b <= a:
                    raise ConfigError(f"{self.gene_id}: isoform exons must ascend: {list(iso)}")
            for x in iso:
                if not 0 <= x < len(self.exons):
                    raise ConfigError(f"{self.gene_id}: isoform references missing exon {x}")
        if any(a < 1 for a in self.abundances):
            raise ConfigError(f"{self.gene_id}: abundances must be positive integers")

    @property
    def start(self) -> int:
        return self.exons[0][0]

    @property
    def end(self) -> int:
        return self.exons[-1][1]

    def transcript_ids(self) -> list[str]:
        return [f"{self.gene_id}.t{i + 1}" for i in range(len(self.isoforms))]

    def transcripts(self, genome: ReferenceGenome) -> list[tuple[str, str]]:
        seq = genome[self.contig]
        return [(tid, "".join(seq[self.exons[x][0]:self.exons[x][1]] for x in iso))
                for tid, iso in zip(self.transcript_ids(), self.isoforms)]


@dataclass
class GroundTruth:
    transcripts: list[tuple[str, str]]
    gene_of: dict[str, str]
    read_counts: dict[str, int]
    read_len: int
    read_origins: dict[str, str] = field(default_factory=dict)

    def mean_coverage(self, tid: str) -> float:
        seq = dict(self.transcripts)[tid]
        return self.read_counts.get(tid, 0) * self.read_len / len(seq)

    def coverages(self) -> dict[str, float]:
        return {tid: self.read_counts.get(tid, 0) * self.read_len / len(seq)
                for tid, seq in self.transcripts}


@dataclass
class Simulation:
    genome: ReferenceGenome
    reads: list  # ShortRead or ReadPair
    truth: GroundTruth
    models: list[GeneModel]


def layout_genes(specs: Sequence[dict], spacer: int = DEFAULT_SPACER, genome_size: int | None = None,
                 rng: np.random.Generator | None = None) -> tuple[list[GeneModel], dict[str, int]]:
    """Place genes given by exon/intron lengths onto contigs, separated by spacers.

    Each spec holds ``id``, ``exons`` (lengths), optional ``introns`` (lengths,
    default 200), ``isoforms``, optional ``abundances`` and ``contig``. When
    ``genome_size`` exceeds the packed size the extra is spread over the
    spacers at random. Returns the models and every contig's length.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    by_contig: dict[str, list[dict]] = {}
    for sp in specs:
        by_contig.setdefault(str(sp.get("contig", "chr1")), []).append(sp)

    def span(sp):
        ex = list(sp["exons"])
        introns = list(sp.get("introns", [200] * (len(ex) - 1)))
        if len(introns) != len(ex) - 1:
            raise ConfigError(f"{sp.get('id')}: need {len(ex) - 1} intron lengths")
        return ex, introns

    packed = sum(sum(span(sp)[0]) + sum(span(sp)[1]) + spacer for sp in specs) + spacer * len(by_contig)
    extra = max(0, (genome_size or 0) - packed)
    n_gaps = len(specs) + len(by_contig)
    cuts = np.sort(rng.integers(0, extra + 1, size=n_gaps - 1)) if n_gaps > 1 else np.array([], int)
    shares = list(np.diff(np.concatenate([[0], cuts, [extra]])).astype(int))

    models, lengths = [], {}
    gap = 0
    for contig, group in by_contig.items():
        pos = spacer + shares[gap]
        gap += 1
        for sp in group:
            ex, introns = span(sp)
            if any(x < 1 for x in ex) or any(x < 1 for x in introns):
                raise ConfigError(f"{sp.get('id')}: exon and intron lengths must be positive")
            exons = []
            for n, length in enumerate(ex):
                exons.append((pos, pos + length))
                pos += length + (introns[n] if n < len(introns) else 0)
            isoforms = tuple(tuple(int(x) for x in iso) for iso in sp["isoforms"])
            abund = tuple(int(a) for a in sp.get("abundances", [1] * len(isoforms)))
            models.append(GeneModel(str(sp["id"]), contig, tuple(exons), isoforms, abund))
            pos += spacer + shares[gap]
            gap += 1
        lengths[contig] = pos
    return models, lengths


def random_genome(lengths: dict[str, int], rng: np.random.Generator) -> ReferenceGenome:
    alphabet = np.frombuffer(BASES.encode(), dtype=np.uint8)
    recs = []
    for name, n in lengths.items():
        recs.append((name, alphabet[rng.integers(0, 4, size=n)].tobytes().decode()))
    return ReferenceGenome.from_records(recs)


def load_models(path) -> tuple[list[dict], dict]:
    """Gene specs and global settings from a YAML model file."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("genes"), list):
        raise ConfigError(f"{path}: expected a mapping with a 'genes' list")
    for n, sp in enumerate(data["genes"]):
        missing = {"id", "exons", "isoforms"} - set(sp)
        if missing:
            raise ConfigError(f"{path}: gene {n} lacks {sorted(missing)}")
    settings = {k: v for k, v in data.items() if k != "genes"}
    return data["genes"], settings


def _mutate(seq: str, err_rate: float, rng: np.random.Generator) -> str:
    if err_rate <= 0:
        return seq
    hits = np.flatnonzero(rng.random(len(seq)) < err_rate)
    if not len(hits):
        return seq
    out = list(seq)
    shifts = rng.integers(1, 4, size=len(hits))
    for i, s in zip(hits, shifts):
        b = BASES.find(out[i])
        out[i] = BASES[(b + s) % 4] if b >= 0 else BASES[s]
    return "".join(out)


def simulate(models: Sequence[GeneModel], genome: ReferenceGenome, read_len: int = 76,
             n_reads: int = 10000, err_rate: float = 0.0, paired: bool = True,
             frag_len: tuple[float, float] = (250.0, 30.0), rng_seed: int = 0) -> Simulation:
    """Sample reads from isoform transcripts in proportion to abundance x length.

    Paired mode draws ``n_reads // 2`` fragments; mate 1 reads the fragment's
    start and mate 2 the reverse complement of its end. Each fragment comes
    from either strand with equal chance.
    """
    if err_rate < 0 or err_rate >= 0.1:
        raise ConfigError("err_rate must lie in [0, 0.1)")
    rng = np.random.default_rng(rng_seed)
    transcripts, gene_of, weights = [], {}, []
    for m in models:
        for (tid, seq), ab in zip(m.transcripts(genome), m.abundances):
            transcripts.append((tid, seq))
            gene_of[tid] = m.gene_id
            weights.append(ab * len(seq))
    if not transcripts:
        raise ConfigError("no transcripts to sample from")
    shortest = min(len(s) for _, s in transcripts)
    if read_len > shortest:
        raise ConfigError(f"read length {read_len} exceeds shortest transcript ({shortest})")
    p = np.asarray(weights, float)
    p /= p.sum()
    n_units = n_reads // 2 if paired else n_reads
    picks = rng.choice(len(transcripts), size=n_units, p=p)
    counts = {tid: 0 for tid, _ in transcripts}
    origins = {}
    reads = []
    qual = "I" * read_len
    width = len(str(max(n_units, 1)))
    mean, sd = frag_len
    for n, t in enumerate(picks):
        tid, tseq = transcripts[t]
        rid = f"r{n + 1:0{width}d}"
        if paired:
            f = int(round(rng.normal(mean, sd)))
            f = min(max(f, read_len), len(tseq))
            s = int(rng.integers(0, len(tseq) - f + 1))
            frag = tseq[s:s + f]
            if rng.random() < 0.5:
                frag = revcomp(frag)
            m1 = _mutate(frag[:read_len], err_rate, rng)
            m2 = _mutate(revcomp(frag[-read_len:]), err_rate, rng)
            reads.append(ReadPair(ShortRead(rid + "/1", m1, qual), ShortRead(rid + "/2", m2, qual)))
            counts[tid] += 2
        else:
            s = int(rng.integers(0, len(tseq) - read_len + 1))
            r = tseq[s:s + read_len]
            if rng.random() < 0.5:
                r = revcomp(r)
            reads.append(ShortRead(rid, _mutate(r, err_rate, rng), qual))
            counts[tid] += 1
        origins[rid] = tid
    truth = GroundTruth(transcripts, gene_of, counts, read_len, origins)
    return Simulation(genome, reads, truth, list(models))


def tiling_reads(transcripts: Sequence[tuple[str, str]], read_len: int = 76, step: int = 7) -> list[ShortRead]:
    """Error-free forward reads at every ``step`` bases, plus each transcript's last window."""
    reads = []
    for tid, seq in transcripts:
        starts = list(range(0, len(seq) - read_len + 1, step))
        if starts[-1] != len(seq) - read_len:
            starts.append(len(seq) - read_len)
        for s in starts:
            reads.append(ShortRead(f"{tid}:{s}", seq[s:s + read_len], "I" * read_len))
    return reads


def figure2_specs(exon_lengths=(300, 200, 250, 300), intron=250) -> list[dict]:
    """Four exons; isoforms use all of them, skip the second, and skip the third."""
    return [{
        "id": "fig2",
        "exons": list(exon_lengths),
        "introns": [intron] * 3,
        "isoforms": [[0, 1, 2, 3], [0, 2, 3], [0, 1, 3]],
        "abundances": [1, 1, 1],
    }]


def random_specs(n_genes: int, rng: np.random.Generator, exon_len=(150, 400), intron_len=(80, 300),
                 max_abundance: int = 5) -> list[dict]:
    """Random genes with 2-4 isoforms built from single and paired exon skips.

    Every isoform keeps the first and last exons, and the skip patterns are
    chosen so each isoform's exon chain differs from the others by at least
    one whole exon.
    """
    specs = []
    for g in range(n_genes):
        n_iso = int(rng.integers(2, 5))
        n_ex = int(rng.integers(4 if n_iso >= 3 else 3, 7))
        full = list(range(n_ex))
        i = int(rng.integers(1, n_ex - 1 - (1 if n_iso >= 3 else 0)))
        isoforms = [full, [x for x in full if x != i]]
        if n_iso >= 3:
            isoforms.append([x for x in full if x != i + 1])
        if n_iso == 4:
            isoforms.append([x for x in full if x not in (i, i + 1)])
        specs.append({
            "id": f"g{g + 1}",
            "exons": [int(x) for x in rng.integers(exon_len[0], exon_len[1] + 1, size=n_ex)],
            "introns": [int(x) for x in rng.integers(intron_len[0], intron_len[1] + 1, size=n_ex - 1)],
            "isoforms": isoforms,
            "abundances": [int(x) for x in rng.integers(1, max_abundance + 1, size=n_iso)],
        })
    return specs


def build(specs: Sequence[dict], seed: int = 0, spacer: int = DEFAULT_SPACER,
          genome_size: int | None = None) -> tuple[list[GeneModel], ReferenceGenome]:
    rng = np.random.default_rng([seed, 1])
    models, lengths = layout_genes(specs, spacer, genome_size, rng)
    return models, random_genome(lengths, rng)


def degrade_genome(genome: ReferenceGenome, models: Sequence[GeneModel], fraction: float = 0.2,
                   seed: int = 0) -> ReferenceGenome:
    """Delete one random stretch covering ``fraction`` of every exon."""
    rng = np.random.default_rng([seed, 2])
    cuts: dict[str, list[tuple[int, int]]] = {}
    for m in models:
        for s, e in m.exons:
            n = int(round((e - s) * fraction))
            if n <= 0:
                continue
            a = s + int(rng.integers(0, e - s - n + 1))
            cuts.setdefault(m.contig, []).append((a, a + n))
    recs = []
    for name, seq in genome.contigs:
        pieces, prev = [], 0
        for a, b in sorted(cuts.get(name, [])):
            pieces.append(seq[prev:a])
            prev = b
        pieces.append(seq[prev:])
        recs.append((name, "".join(pieces)))
    return ReferenceGenome.from_records(recs)


TRUTH_FIELDS = ["transcript_id", "gene_id", "length", "n_reads", "read_len", "mean_coverage", "sequence"]


def write_truth(path, truth: GroundTruth):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(TRUTH_FIELDS)
        for tid, seq in truth.transcripts:
            n = truth.read_counts.get(tid, 0)
            w.writerow([tid, truth.gene_of.get(tid, ""), len(seq), n, truth.read_len,
                        f"{n * truth.read_len / len(seq):.4f}", seq])


def write_origins(path, truth: GroundTruth):
    with open(path, "w") as fh:
        fh.write("read_id\ttranscript_id\n")
        for rid, tid in truth.read_origins.items():
            fh.write(f"{rid}\t{tid}\n")


def read_truth(path) -> GroundTruth:
    transcripts, gene_of, counts = [], {}, {}
    read_len = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        missing = {"transcript_id", "sequence"} - set(reader.fieldnames or [])
        if missing:
            raise ConfigError(f"{path}: truth table lacks {sorted(missing)}")
        for row in reader:
            tid = row["transcript_id"]
            transcripts.append((tid, row["sequence"]))
            gene_of[tid] = row.get("gene_id", "")
            counts[tid] = int(row.get("n_reads") or 0)
            read_len = int(row.get("read_len") or read_len)
    return GroundTruth(transcripts, gene_of, counts, read_len)
