"""End-to-end assembly: localize, bin, grow backbones, patch-and-cut each locus."""
from __future__ import annotations

import itertools
import json
import logging
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import __version__
from .config import AssemblyConfig, InvariantError
from .correct import CorrectionParams, correct_reads
from .graph import Enumeration, IsoformGraph, IsoformStructure, build_graph, enumerate_paths, to_dot, to_gfa
from .grow import Backbone, seed_and_grow
from .index import (FLAG_MATE1, FLAG_MATE2, FLAG_SECONDARY, FLAG_SUPPLEMENTARY, KmerIndex,
                    iter_alignment_records)
from .localize import Bin, LocalizationReport, bin_reads, localize_paired, localize_single
from .seqio import ReadPair, ReferenceGenome, ShortRead, format_fastq, strip_mate_suffix, write_fasta

log = logging.getLogger(__name__)


@dataclass
class Contig:
    id: str
    seq: str
    structure: IsoformStructure
    locus_id: int

    @property
    def header(self) -> str:
        idx = self.id.rsplit("_path", 1)[-1]
        return (f"{self.id} locus={self.locus_id} structure={idx} length={len(self.seq)} "
                f"vertices={len(self.structure.path)}")


@dataclass
class LocusAssembly:
    locus_id: int
    contig: str
    start: int
    end: int
    n_reads: int
    backbones: list[Backbone]
    graph: IsoformGraph
    enumeration: Enumeration
    contigs: list[Contig]
    suppressed_patches: int = 0


@dataclass
class AssemblyResult:
    report: LocalizationReport
    bins: list[Bin]
    loci: list[LocusAssembly] = field(default_factory=list)
    min_contig_len: int = 50

    @property
    def all_contigs(self) -> list[Contig]:
        return [c for locus in self.loci for c in locus.contigs]

    @property
    def contigs(self) -> list[Contig]:
        return [c for c in self.all_contigs if len(c.seq) >= self.min_contig_len]


def assemble_reads(reads: list[tuple[str, str]], cfg: AssemblyConfig, locus_id: int = 0):
    """Stages II and III over one locus's oriented read sequences."""
    params = cfg.overlap
    seedable = None
    if cfg.correct_errors and reads:
        corr = correct_reads([seq for _, seq in reads], CorrectionParams(k=cfg.correction_k))
        reads = [(rid, seq) for (rid, _), seq in zip(reads, corr.seqs)]
        # a bin without one solid read gives no spectrum to judge reads by
        seedable = corr.trusted if any(corr.trusted) else None
    rng = np.random.default_rng([cfg.rng_seed, locus_id]) if cfg.shuffle_seeds else None
    backbones = seed_and_grow(reads, params, rng, seedable)
    build = build_graph([bb.seq for bb in backbones], params)
    enum = enumerate_paths(build.graph, cfg.max_paths)
    if len(enum.contigs) != len(enum.structures):
        raise InvariantError(f"locus {locus_id}: enumeration returned an inconsistent path set")
    # a short motif closing two exons can let two paths spell one sequence
    seen = set()
    contigs = []
    for st, seq in zip(enum.structures, enum.contigs):
        if seq not in seen:
            seen.add(seq)
            contigs.append(Contig(f"locus{locus_id}_path{len(contigs) + 1}", seq, st, locus_id))
    return backbones, build, enum, contigs


def assemble_bin(b: Bin, cfg: AssemblyConfig) -> LocusAssembly:
    reads = b.sequences()
    backbones, build, enum, contigs = assemble_reads(reads, cfg, b.locus_id)
    return LocusAssembly(b.locus_id, b.contig, b.start, b.end, len(reads), backbones,
                         build.graph, enum, contigs, len(build.suppressed))


def load_hits(path, paired: bool) -> dict:
    """Primary mapped records from an alignment file, keyed for the localizer."""
    hits = {}
    for rec in iter_alignment_records(path):
        if rec.flag & (FLAG_SECONDARY | FLAG_SUPPLEMENTARY):
            continue
        qid = rec.hit.query_id
        if paired:
            if rec.flag & FLAG_MATE1:
                mate = 1
            elif rec.flag & FLAG_MATE2:
                mate = 2
            elif qid.endswith("/1"):
                mate = 1
            elif qid.endswith("/2"):
                mate = 2
            else:
                continue
            key = (strip_mate_suffix(qid), mate)
        else:
            key = qid
        hits.setdefault(key, rec.hit)
    return hits


def localize(reads: Iterable, index: KmerIndex, cfg: AssemblyConfig, alignments=None):
    it = iter(reads)
    first = next(it, None)
    if first is None:
        return [], LocalizationReport(), False
    stream = itertools.chain([first], it)
    paired = isinstance(first, ReadPair)
    hits = load_hits(alignments, paired) if alignments is not None else None
    if paired:
        localized, report = localize_paired(stream, index, cfg, hits)
    else:
        localized, report = localize_single(stream, index, cfg, hits)
    return localized, report, paired


def assemble(reads: Iterable[ShortRead] | Iterable[ReadPair], genome: ReferenceGenome,
             cfg: AssemblyConfig | None = None, alignments=None,
             index: KmerIndex | None = None) -> AssemblyResult:
    cfg = cfg or AssemblyConfig()
    if index is None:
        index = KmerIndex(genome, cfg.w, cfg.max_occ)
    localized, report, _ = localize(reads, index, cfg, alignments)
    bins = bin_reads(localized, cfg.d, genome.names)
    report.bins = len(bins)
    log.info("localized %d/%d reads into %d bins", report.whole_aligned + report.part_anchored,
             report.total, len(bins))
    if cfg.threads > 1 and len(bins) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            loci = list(pool.map(lambda b: assemble_bin(b, cfg), bins))
    else:
        loci = [assemble_bin(b, cfg) for b in bins]
    keys = [(genome.names.index(l.contig), l.start) for l in loci]
    if keys != sorted(keys):
        raise InvariantError("loci are not in genome order")
    return AssemblyResult(report, bins, loci, cfg.min_len)


def write_outputs(result: AssemblyResult, out_dir, cfg: AssemblyConfig, inputs: dict | None = None,
                  debug: bool = False, dump_localized: bool = False) -> dict:
    """contigs.fasta, per-locus graphs, report, unlocalized sink and manifest."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    paths["contigs"] = os.path.join(out_dir, "contigs.fasta")
    write_fasta(paths["contigs"], [(c.header, c.seq) for c in result.contigs])

    graph_dir = os.path.join(out_dir, "graphs")
    os.makedirs(graph_dir, exist_ok=True)
    for locus in result.loci:
        base = os.path.join(graph_dir, f"locus{locus.locus_id}")
        with open(base + ".gfa", "w") as fh:
            fh.write(to_gfa(locus.graph, f"L{locus.locus_id}_"))
        with open(base + ".dot", "w") as fh:
            fh.write(to_dot(locus.graph, f"locus{locus.locus_id}"))

    paths["report"] = os.path.join(out_dir, "localization_report.tsv")
    with open(paths["report"], "w") as fh:
        fh.write("metric\tvalue\n")
        for key, value in result.report.rows():
            fh.write(f"{key}\t{value}\n")
        fh.write(f"contigs\t{len(result.contigs)}\n")
        fh.write(f"contigs_below_min_len\t{len(result.all_contigs) - len(result.contigs)}\n")
        fh.write(f"truncated_loci\t{sum(l.enumeration.truncated for l in result.loci)}\n")

    paths["unlocalized"] = os.path.join(out_dir, "unlocalized.fastq")
    with open(paths["unlocalized"], "w") as fh:
        for item in result.report.unlocalized_reads:
            if isinstance(item, ReadPair):
                fh.write(format_fastq(item.r1))
                fh.write(format_fastq(item.r2))
            else:
                fh.write(format_fastq(item))

    paths["loci"] = os.path.join(out_dir, "loci.tsv")
    with open(paths["loci"], "w") as fh:
        fh.write("locus_id\tcontig\tstart\tend\tsequences\tbackbones\tvertices\tedges\tpaths\ttruncated\n")
        for l in result.loci:
            fh.write(f"{l.locus_id}\t{l.contig}\t{l.start}\t{l.end}\t{l.n_reads}\t{len(l.backbones)}\t"
                     f"{len(l.graph)}\t{len(l.graph.edges)}\t{len(l.contigs)}\t{int(l.enumeration.truncated)}\n")

    if dump_localized:
        paths["localized"] = os.path.join(out_dir, "localized.tsv")
        with open(paths["localized"], "w") as fh:
            fh.write("read_id\tcontig\tpos\tstrand\torigin\tpart\tbin_id\n")
            for b in result.bins:
                for lr in b.reads:
                    a = lr.anchor
                    fh.write(f"{lr.id}\t{a.contig}\t{a.pos}\t{a.strand}\t{lr.origin}\t"
                             f"{lr.part or ''}\t{b.locus_id}\n")

    if debug:
        dbg = os.path.join(out_dir, "debug")
        os.makedirs(dbg, exist_ok=True)
        for l in result.loci:
            recs = [(f"locus{l.locus_id}_bb{n} seed={bb.seed_id} covered={len(bb.covered_read_ids)}", bb.seq)
                    for n, bb in enumerate(l.backbones, 1)]
            write_fasta(os.path.join(dbg, f"locus{l.locus_id}_backbones.fasta"), recs)
        write_fasta(os.path.join(dbg, "all_contigs.fasta"), [(c.header, c.seq) for c in result.all_contigs])

    paths["manifest"] = os.path.join(out_dir, "manifest.json")
    manifest = {
        "tool": "seedpatch",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": cfg.as_dict(),
        "inputs": inputs or {},
        "outputs": {k: os.path.basename(v) for k, v in paths.items()},
    }
    with open(paths["manifest"], "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return paths
