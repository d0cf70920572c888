import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from seedpatch.config import ConfigError
from seedpatch.evaluate import evaluate, map_contig
from seedpatch.seqio import ReadPair, revcomp
from seedpatch.simulate import GeneModel, build, figure2_specs, simulate

import oracles


def rand(n, seed):
    return "".join(np.random.default_rng(seed).choice(list("ACGT"), size=n))


def test_map_contig_containment():
    t = rand(300, 1)
    assert map_contig(t[50:150], t) == (100, 0, 0)


def test_map_contig_substitutions_and_deletion():
    t = rand(300, 2)
    src = list(t[100:200])
    for i in (10, 40, 80):
        src[i] = "ACGT"[("ACGT".index(src[i]) + 1) % 4]
    contig = "".join(src[:60] + src[62:])
    assert map_contig(contig, t) == (95, 3, 2)
    assert oracles.semi_global(contig, t) == (95, 3, 2)


def test_map_contig_random_sequence_is_poor():
    M, N, G = map_contig(rand(150, 3), rand(400, 4))
    assert M / (M + N + G) < 0.75


def test_map_contig_rejects_empty():
    with pytest.raises(ValueError):
        map_contig("", "ACGT")


def _mutated(data, t):
    s = list(t)
    for _ in range(data.draw(st.integers(0, 6))):
        op = data.draw(st.sampled_from("sid"))
        if not s:
            break
        i = data.draw(st.integers(0, len(s) - 1))
        if op == "s":
            s[i] = data.draw(st.sampled_from("ACGT"))
        elif op == "i":
            s.insert(i, data.draw(st.sampled_from("ACGT")))
        else:
            del s[i]
    return "".join(s) or "A"


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_map_contig_matches_dp_oracle(data):
    alpha = data.draw(st.sampled_from(["AC", "ACGT"]))
    t = data.draw(st.text(alphabet=alpha, min_size=1, max_size=200))
    if data.draw(st.booleans()) and len(t) > 2:
        a = data.draw(st.integers(0, len(t) - 2))
        b = data.draw(st.integers(a + 1, len(t)))
        c = _mutated(data, t[a:b])
    else:
        c = data.draw(st.text(alphabet=alpha + "N", min_size=1, max_size=200))
    assert map_contig(c, t) == oracles.semi_global(c, t)


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="AC", min_size=1, max_size=8), st.text(alphabet="AC", min_size=1, max_size=8))
def test_map_contig_small_universe(c, t):
    assert map_contig(c, t) == oracles.semi_global(c, t)


def test_evaluate_exact_contig():
    t = rand(500, 5)
    ev = evaluate([("c1", t)], [("t1", t)], {"t1": 30.0})
    assert ev.contig_mapped == {"c1": True} and ev.reconstructed == {"t1": True}
    assert (ev.precision, ev.accuracy) == (1.0, 1.0)


def test_evaluate_partial_contig():
    t = rand(500, 6)
    ev = evaluate([("c1", t[:400])], [("t1", t)], {"t1": 30.0})
    assert ev.contig_mapped["c1"] and ev.precision == 1.0
    assert not ev.reconstructed["t1"] and ev.identity["t1"] == pytest.approx(0.8)
    assert ev.accuracy == 0.0


def test_evaluate_reverse_strand_contig():
    t = rand(400, 7)
    ev = evaluate([("c1", revcomp(t))], [("t1", t)])
    assert ev.precision == 1.0 and ev.accuracy == 1.0


def test_evaluate_min_coverage_filter():
    a, b = rand(300, 8), rand(300, 9)
    ev = evaluate([("c1", a)], [("ta", a), ("tb", b)], {"ta": 20.0, "tb": 4.9})
    assert ev.eligible == ["ta"] and ev.accuracy == 1.0
    ev = evaluate([("c1", a)], [("ta", a), ("tb", b)], {"ta": 20.0, "tb": 5.0})
    assert ev.accuracy == 0.5


def test_evaluate_junk_contig_unmapped():
    t = rand(400, 10)
    ev = evaluate([("good", t), ("junk", rand(200, 11))], [("t1", t)])
    assert ev.contig_mapped == {"good": True, "junk": False} and ev.precision == 0.5


def test_evaluate_thresholds_are_configurable():
    t = rand(500, 12)
    ev = evaluate([("c1", t[:400])], [("t1", t)], identity_cutoff=0.8)
    assert ev.accuracy == 1.0


@pytest.fixture(scope="module")
def corpus():
    specs = [dict(sp, contig="chr1") for sp in figure2_specs()]
    specs[0]["abundances"] = [1, 2, 3]
    models, genome = build(specs, seed=3)
    return models, genome


def test_perfect_input_fixpoint(corpus):
    models, genome = corpus
    sim = simulate(models, genome, n_reads=2000, rng_seed=1)
    ev = evaluate(sim.truth.transcripts, sim.truth.transcripts, sim.truth.coverages())
    assert (ev.precision, ev.accuracy) == (1.0, 1.0)
    assert sum(r["transcripts"] for r in ev.deciles) == len(ev.eligible)


def test_figure2_simulation(corpus):
    models, genome = corpus
    sim = simulate(models, genome, n_reads=4000, rng_seed=2)
    ts = dict(sim.truth.transcripts)
    assert len(ts) == 3
    m = models[0]
    exons = [genome[m.contig][s:e] for s, e in m.exons]
    mates = [r for p in sim.reads for r in (p.r1, p.r2)]
    fwd = [s for r in mates for s in (r.seq, revcomp(r.seq))]
    for a, b in [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3)]:
        junction = exons[a][-10:] + exons[b][:10]
        assert any(junction in s for s in fwd), (a, b)


def test_error_free_reads_are_transcript_substrings():
    models, genome = build([{"id": "g", "exons": [400, 300], "isoforms": [[0, 1]]}], seed=4)
    t = models[0].transcripts(genome)[0][1]
    sim = simulate(models, genome, n_reads=200, paired=False, rng_seed=3)
    assert sim.truth.mean_coverage("g.t1") == pytest.approx(200 * 76 / 700)
    for r in sim.reads:
        assert r.seq in t or revcomp(r.seq) in t


def test_simulate_is_deterministic(corpus):
    models, genome = corpus
    a = simulate(models, genome, n_reads=500, err_rate=0.01, rng_seed=9)
    b = simulate(models, genome, n_reads=500, err_rate=0.01, rng_seed=9)
    c = simulate(models, genome, n_reads=500, err_rate=0.01, rng_seed=10)
    assert a.reads == b.reads and a.reads != c.reads
    assert build(figure2_specs(), seed=5)[1].contigs == build(figure2_specs(), seed=5)[1].contigs


def test_coverage_bookkeeping(corpus):
    models, genome = corpus
    for paired in (True, False):
        sim = simulate(models, genome, n_reads=1000, paired=paired, rng_seed=4)
        assert sum(sim.truth.read_counts.values()) == 1000
        for tid, seq in sim.truth.transcripts:
            assert sim.truth.coverages()[tid] == sim.truth.read_counts[tid] * 76 / len(seq)
        assert len(sim.truth.read_origins) == len(sim.reads)
        assert all(isinstance(r, ReadPair) == paired for r in sim.reads)


def test_abundance_proportional_sampling(corpus):
    models, genome = corpus
    sim = simulate(models, genome, n_reads=20000, paired=False, rng_seed=5)
    m = models[0]
    weights = np.array([ab * len(s) for (_, s), ab in zip(m.transcripts(genome), m.abundances)], float)
    observed = np.array([sim.truth.read_counts[tid] for tid in m.transcript_ids()], float)
    expected = weights / weights.sum() * observed.sum()
    assert chisquare(observed, expected).pvalue > 1e-3


def test_error_rate_is_realized(corpus):
    models, genome = corpus
    sim = simulate(models, genome, n_reads=4000, paired=False, err_rate=0.02, rng_seed=6)
    ts = dict(sim.truth.transcripts)
    exact = sum(r.seq in ts[sim.truth.read_origins[r.id]] or revcomp(r.seq) in ts[sim.truth.read_origins[r.id]]
                for r in sim.reads)
    # a read is error-free with probability 0.98 ** 76
    assert exact / 4000 == pytest.approx(0.98 ** 76, abs=0.03)


def test_simulate_rejects_bad_input(corpus):
    models, genome = corpus
    with pytest.raises(ConfigError):
        simulate(models, genome, err_rate=0.1)
    with pytest.raises(ConfigError):
        simulate(models, genome, read_len=10_000)
    with pytest.raises(ConfigError):
        GeneModel("g", "chr1", ((0, 10), (20, 30)), ((0, 2),), (1,))
    with pytest.raises(ConfigError):
        GeneModel("g", "chr1", ((0, 10), (5, 30)), ((0, 1),), (1,))


def test_genes_are_separated_by_spacer():
    from seedpatch.simulate import layout_genes
    specs = [{"id": f"g{i}", "exons": [100, 100], "isoforms": [[0, 1]]} for i in range(3)]
    models, _ = layout_genes(specs, spacer=600)
    for a, b in zip(models, models[1:]):
        assert b.start - a.end >= 600
