"""Command line entry points: assemble, simulate, evaluate.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O or parse
failure, 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .config import AssemblyConfig, ConfigError, InvariantError
from .evaluate import evaluate, write_metrics
from .pipeline import assemble, write_outputs
from .seqio import ParseError, parse_fasta, open_text, read_fasta, read_fastq, write_fasta, write_fastq
from .simulate import build, load_models, read_truth, simulate, write_origins, write_truth

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 2, 3, 4

log = logging.getLogger("seedpatch")


class UsageError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("SEEDPATCH_LOG", "WARNING").upper()
    if level.isdigit():
        level = int(level)
    elif not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _readable(path: str, what: str) -> str:
    if not os.path.isfile(path) or not os.access(path, os.R_OK):
        raise UsageError(f"cannot read {what}: {path}")
    return path


def _config(args) -> AssemblyConfig:
    return AssemblyConfig(
        k=args.k, e1=args.e1, e2=args.e2, d=args.d, w=args.w, max_occ=args.max_occ,
        max_mismatch=args.max_mismatch, max_paths=args.max_paths,
        min_contig_len=args.min_contig_len, threads=args.threads, rng_seed=args.seed,
        shuffle_seeds=args.shuffle_seeds, correct_errors=not args.no_correct,
        correction_k=args.correction_k,
    )


def cmd_assemble(args) -> int:
    cfg = _config(args)
    if args.reads and (args.mate1 or args.mate2):
        raise UsageError("give either --reads or -1/-2, not both")
    if args.reads:
        reads = read_fastq(_readable(args.reads, "reads"))
        inputs = {"reads": args.reads}
    elif args.mate1 and args.mate2:
        reads = read_fastq(_readable(args.mate1, "mate 1 reads"), _readable(args.mate2, "mate 2 reads"))
        inputs = {"reads_1": args.mate1, "reads_2": args.mate2}
    else:
        raise UsageError("need --reads, or both -1 and -2")
    genome = read_fasta(_readable(args.genome, "genome"))
    inputs["genome"] = args.genome
    if args.alignments:
        inputs["alignments"] = _readable(args.alignments, "alignments")
    result = assemble(reads, genome, cfg, alignments=args.alignments)
    write_outputs(result, args.out, cfg, inputs, debug=args.debug, dump_localized=args.dump_localized)
    print(f"{len(result.contigs)} contigs from {result.report.total} reads in {len(result.bins)} loci "
          f"-> {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    specs, settings = load_models(_readable(args.models, "model file"))
    # command line values win over the model file, which wins over defaults
    opt = dict(read_len=76, n_reads=10000, err_rate=0.0, paired=True, frag_mean=250.0, frag_sd=30.0,
               seed=0, spacer=2000, genome_size=None)
    unknown = set(settings) - set(opt)
    if unknown:
        raise ConfigError(f"unknown model settings: {sorted(unknown)}")
    opt.update(settings)
    for key in opt:
        value = getattr(args, key, None)
        if value is not None:
            opt[key] = value
    if args.single:
        opt["paired"] = False
    models, genome = build(specs, seed=opt["seed"], spacer=opt["spacer"], genome_size=opt["genome_size"])
    sim = simulate(models, genome, read_len=opt["read_len"], n_reads=opt["n_reads"],
                   err_rate=opt["err_rate"], paired=opt["paired"],
                   frag_len=(opt["frag_mean"], opt["frag_sd"]), rng_seed=opt["seed"])
    os.makedirs(args.out, exist_ok=True)
    write_fasta(os.path.join(args.out, "genome.fasta"), list(genome.contigs))
    if opt["paired"]:
        write_fastq(os.path.join(args.out, "reads_1.fastq"), (p.r1 for p in sim.reads))
        write_fastq(os.path.join(args.out, "reads_2.fastq"), (p.r2 for p in sim.reads))
    else:
        write_fastq(os.path.join(args.out, "reads.fastq"), sim.reads)
    write_truth(os.path.join(args.out, "truth.tsv"), sim.truth)
    write_origins(os.path.join(args.out, "origins.tsv"), sim.truth)
    with open(os.path.join(args.out, "genes.tsv"), "w") as fh:
        fh.write("gene_id\tcontig\texons\tisoforms\tabundances\n")
        for m in models:
            exons = ",".join(f"{s}-{e}" for s, e in m.exons)
            isos = ";".join(",".join(map(str, iso)) for iso in m.isoforms)
            fh.write(f"{m.gene_id}\t{m.contig}\t{exons}\t{isos}\t{','.join(map(str, m.abundances))}\n")
    print(f"{len(sim.truth.transcripts)} transcripts, {sum(sim.truth.read_counts.values())} reads -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    truth = read_truth(_readable(args.truth, "truth table"))
    with open_text(_readable(args.contigs, "contigs")) as fh:
        contigs = [(name.split()[0], seq) for name, seq in parse_fasta(fh)]
    ids = [cid for cid, _ in contigs]
    if len(set(ids)) != len(ids):
        log.warning("duplicate contig ids in %s; later records shadow earlier ones", args.contigs)
    tids = [tid for tid, _ in truth.transcripts]
    if len(set(tids)) != len(tids):
        log.warning("duplicate transcript ids in %s", args.truth)
    clash = set(ids) & set(tids)
    if clash:
        log.warning("%d ids appear both as contigs and transcripts", len(clash))
    if not truth.read_len or not any(truth.read_counts.values()):
        log.warning("truth table carries no read counts; every transcript counts toward accuracy")
        coverage = None
    else:
        coverage = truth.coverages()
    res = evaluate(contigs, truth.transcripts, coverage, min_coverage=args.min_coverage,
                   precision_cutoff=args.precision_cutoff, identity_cutoff=args.identity_cutoff)
    out = args.out
    if os.path.dirname(out):
        os.makedirs(os.path.dirname(out), exist_ok=True)
    write_metrics(out, res)
    print(" ".join(f"{k}={v}" for k, v in res.rows()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seedpatch", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    d = AssemblyConfig()

    a = sub.add_parser("assemble", help="localize reads, then assemble isoforms per locus")
    a.add_argument("--reads", help="single-end FASTQ")
    a.add_argument("-1", dest="mate1", help="mate 1 FASTQ")
    a.add_argument("-2", dest="mate2", help="mate 2 FASTQ")
    a.add_argument("--genome", required=True, help="reference FASTA used for localization")
    a.add_argument("--alignments", help="SAM-like file with whole-read alignments")
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--k", type=int, default=d.k, help="minimum overlap length")
    a.add_argument("--e1", type=float, default=d.e1, help="max error rate in an overlap")
    a.add_argument("--e2", type=int, default=d.e2, help="max run of consecutive errors")
    a.add_argument("--d", type=int, default=d.d, help="intergenic distance for binning")
    a.add_argument("--w", type=int, default=d.w, help="aligner seed length")
    a.add_argument("--max-occ", type=int, default=d.max_occ, help="skip seeds occurring more often")
    a.add_argument("--max-mismatch", type=int, default=d.max_mismatch, help="aligner mismatches per read")
    a.add_argument("--max-paths", type=int, default=d.max_paths, help="isoform paths per locus")
    a.add_argument("--min-contig-len", type=int, default=None, help="default 2k")
    a.add_argument("--threads", type=int, default=d.threads)
    a.add_argument("--seed", type=int, default=d.rng_seed)
    a.add_argument("--shuffle-seeds", action="store_true", help="random seed-read order per locus")
    a.add_argument("--no-correct", action="store_true", help="skip per-locus k-mer read correction")
    a.add_argument("--correction-k", type=int, default=d.correction_k)
    a.add_argument("--debug", action="store_true", help="also write backbones and unfiltered contigs")
    a.add_argument("--dump-localized", action="store_true", help="write per-read localization table")
    a.set_defaults(func=cmd_assemble)

    s = sub.add_parser("simulate", help="simulate a genome, reads and truth from gene models")
    s.add_argument("--models", required=True, help="YAML gene model file")
    s.add_argument("--out", required=True)
    s.add_argument("--read-len", type=int)
    s.add_argument("--n-reads", type=int)
    s.add_argument("--err-rate", type=float)
    s.add_argument("--frag-mean", type=float)
    s.add_argument("--frag-sd", type=float)
    s.add_argument("--single", action="store_true", help="single-end reads")
    s.add_argument("--spacer", type=int)
    s.add_argument("--genome-size", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("evaluate", help="precision and accuracy of contigs against a truth table")
    e.add_argument("--contigs", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--out", default="metrics.tsv")
    e.add_argument("--min-coverage", type=float, default=5.0)
    e.add_argument("--precision-cutoff", type=float, default=0.9)
    e.add_argument("--identity-cutoff", type=float, default=0.9)
    e.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, ValueError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvariantError, AssertionError) as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
