import numpy as np
from hypothesis import given, settings, strategies as st

from seedpatch.grow import ReadPool, finalize, grow_all, grow_one, seed_and_grow
from seedpatch.overlap import OverlapParams, cover
from seedpatch.simulate import figure2_specs, build, tiling_reads

EXACT = OverlapParams(25, 0.0, 0)


def random_seq(n, seed):
    return "".join(np.random.default_rng(seed).choice(list("ACGT"), size=n))


def test_single_read():
    pool = ReadPool([("r", "ACGT" * 10)], EXACT)
    bb = grow_one(pool, 0)
    assert bb.seq == "ACGT" * 10 and bb.covered_read_ids == {"r"}


def test_tiling_reads_rebuild_transcript():
    t = random_seq(300, 1)
    k = 25
    L = 80
    step = L - k
    starts = list(range(0, len(t) - L + 1, step))
    if starts[-1] != len(t) - L:
        starts.append(len(t) - L)
    reads = [(f"r{i}", t[s:s + L]) for i, s in enumerate(starts)]
    bbs = grow_all(ReadPool(reads, OverlapParams(k, 0.0, 0)))
    assert len(bbs) == 1
    assert bbs[0].seq == t
    assert bbs[0].covered_read_ids == {rid for rid, _ in reads}


def test_identical_reads_one_backbone():
    r = random_seq(76, 2)
    bbs = seed_and_grow([(f"r{i}", r) for i in range(6)], EXACT)
    assert [bb.seq for bb in bbs] == [r]


def test_disjoint_clusters():
    a, b = random_seq(200, 3), random_seq(200, 4)
    reads = [(f"a{i}", a[i:i + 76]) for i in range(0, 125, 20)] + [(f"b{i}", b[i:i + 76]) for i in range(0, 125, 20)]
    bbs = seed_and_grow(reads, EXACT)
    assert sorted(bb.seq for bb in bbs) == sorted([a[:196], b[:196]])


def figure2():
    models, genome = build(figure2_specs(), seed=0)
    m = models[0]
    exons = [genome[m.contig][s:e] for s, e in m.exons]
    return m, genome, exons


def test_figure2_green_seed_spans_three_exons():
    m, genome, (purple, green, yellow, blue) = figure2()
    transcripts = m.transcripts(genome)
    # skip-yellow reads listed first, so they win extension ties
    reads = [(r.id, r.seq) for r in tiling_reads(transcripts[2:] + transcripts[:2])]
    seed = next(i for i, (_, s) in enumerate(reads) if s in green)
    bb = grow_one(ReadPool(reads, EXACT), seed)
    assert purple[-50:] + green + blue[:50] in bb.seq


def test_figure2_three_backbones_both_orders():
    m, genome, _ = figure2()
    reads = [(r.id, r.seq) for r in tiling_reads(m.transcripts(genome))]
    assert len(seed_and_grow(reads, EXACT)) == 3
    rng = np.random.default_rng(5)
    assert len(seed_and_grow(reads, EXACT, rng)) >= 2


def test_finalize_pads_with_inactive_reads():
    t = random_seq(400, 9)
    reads = [("a", t[0:100]), ("b", t[150:250]), ("c", t[75:175]), ("d", t[225:325])]
    pool = ReadPool(reads, EXACT)
    assert grow_one(pool, 0).seq == t[0:325]
    # as if an earlier backbone had consumed every read but "b"
    pool = ReadPool(reads, EXACT)
    for r in (0, 2, 3):
        pool.deactivate(r)
    b0 = grow_one(pool, 1)
    assert b0.seq == t[150:250]
    padded = finalize([b0], pool)[0]
    assert padded.seq == t[75:325]
    assert (padded.left_pad_read, padded.right_pad_read) == ("c", "d")


def test_finalize_unchanged_at_terminus():
    t = random_seq(120, 10)
    pool = ReadPool([("a", t)], EXACT)
    bbs = finalize(grow_all(pool), pool)
    assert bbs[0].seq == t and bbs[0].left_pad_read is None and bbs[0].right_pad_read is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12), st.booleans())
def test_partition_and_coverage(seed, n_reads, shuffle):
    rng = np.random.default_rng(seed)
    t = "".join(rng.choice(list("ACGT"), size=300))
    reads = []
    for i in range(n_reads):
        s = int(rng.integers(0, 300 - 60))
        reads.append((f"r{i}", t[s:s + 60]))
    params = OverlapParams(20, 0.0, 0)
    bbs = seed_and_grow(reads, params, np.random.default_rng(seed) if shuffle else None)
    ids = [rid for bb in bbs for rid in bb.covered_read_ids]
    assert sorted(ids) == sorted(rid for rid, _ in reads)
    seqs = dict(reads)
    for bb in bbs:
        assert bb.seq in t
        for rid in bb.covered_read_ids:
            assert cover(seqs[rid], bb.seq, params) is not None


def test_unseedable_reads_extend_but_never_seed():
    t = random_seq(300, 11)
    junk = random_seq(76, 12)
    reads = [("edge", t[0:76]), ("mid", t[50:126]), ("tail", t[100:176]), ("junk", junk)]
    bbs = seed_and_grow(reads, EXACT, seedable=[False, True, True, False])
    assert [bb.seq for bb in bbs] == [t[0:176]]
    assert bbs[0].covered_read_ids == {"edge", "mid", "tail"}
    assert seed_and_grow(reads[3:], EXACT, seedable=[False]) == []
