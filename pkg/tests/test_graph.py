import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seedpatch.graph import (IsoformGraph, _PairState, _update_graph, build_graph, cut_left, cut_right,
                             enumerate_paths, find_remnant, merge_vertices, patch_left, patch_right, to_dot, to_gfa)
from seedpatch.grow import seed_and_grow
from seedpatch.overlap import OverlapParams, cover
from seedpatch.simulate import build, figure2_specs, tiling_reads

import oracles
from naive_graph import naive_build_graph

K3 = OverlapParams(3, 0.0, 0)
EXACT = OverlapParams(25, 0.0, 0)


def rand(n, seed):
    return "".join(np.random.default_rng(seed).choice(list("ACGT"), size=n))


def test_patch_examples():
    S = "AAACCCGGG"
    assert tuple(patch_left("CCCTTT", S, K3)) == (4, 3)
    assert tuple(patch_right("TTTCCC", S, K3)) == (4, 3)
    assert patch_left("TTTTTT", S, K3) is None
    assert patch_right("TTTTTT", S, K3) is None


def test_cut_examples():
    assert cut_left("CCCTTT", "AAACCCGGG", 4, 3) == ("AAA", "CCC", "GGG", "TTT")
    assert cut_right("TTTCCC", "AAACCCGGG", 4, 3) == ("AAA", "CCC", "GGG", "TTT")
    assert cut_left("AAACCCGGG", "AAACCCGGG", 1, 9) == ("", "AAACCCGGG", "", "")
    with pytest.raises(ValueError):
        cut_left("CCC", "AAACCCGGG", 8, 3)


PATCH_GRID = [OverlapParams(k, e1, e2) for k in (2, 3, 4) for e1 in (0.0, 0.2, 0.34) for e2 in (0, 1, 2)]


@pytest.mark.parametrize("params", PATCH_GRID, ids=str)
def test_patch_exhaustive_small(params):
    words = ["".join(t) for n in range(params.k, 7) for t in itertools.product("AC", repeat=n)]
    for Sp in words:
        for S in words:
            for right, fn in ((False, patch_left), (True, patch_right)):
                got = fn(Sp, S, params)
                got = None if got is None else tuple(got)
                assert got == oracles.patch(Sp, S, params.k, params.e1, params.e2, right)


@settings(max_examples=400, deadline=None)
@given(st.text(alphabet="AC", min_size=2, max_size=30), st.text(alphabet="AC", min_size=2, max_size=30),
       st.sampled_from(PATCH_GRID), st.booleans())
def test_patch_matches_oracle(Sp, S, params, right):
    fn = patch_right if right else patch_left
    got = fn(Sp, S, params)
    got = None if got is None else tuple(got)
    assert got == oracles.patch(Sp, S, params.k, params.e1, params.e2, right)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="ACGT", min_size=4, max_size=30), st.text(alphabet="ACGT", min_size=4, max_size=30),
       st.booleans())
def test_cut_conservation(Sp, S, right):
    fn = patch_right if right else patch_left
    pt = fn(Sp, S, K3)
    if pt is None:
        return
    if right:
        s1, s2, s3, s4 = cut_right(Sp, S, pt.i, pt.p)
        assert s4 + s2 == Sp
    else:
        s1, s2, s3, s4 = cut_left(Sp, S, pt.i, pt.p)
        assert s2 + s4 == Sp
    assert s1 + s2 + s3 == S


def _one_update(S, Sp, direction):
    g = IsoformGraph.from_parts([S, Sp], [])
    state = _PairState(g, 3)
    for v in g.vertices:
        state.add(v)
    fn = patch_left if direction == "left" else patch_right
    pt = fn(Sp, S, K3)
    _update_graph(g, state, 0, 1, pt, direction)
    return g


def _named(g):
    return sorted((g.seqs[u], g.seqs[v]) for u, v in g.edges)


def test_update_left_patch():
    g = _one_update("AAACCCGGG", "CCCTTT", "left")
    assert sorted(g.seqs.values()) == ["AAA", "CCC", "GGG", "TTT"]
    assert _named(g) == [("AAA", "CCC"), ("CCC", "GGG"), ("CCC", "TTT")]


def test_update_right_patch():
    g = _one_update("AAACCCGGG", "TTTCCC", "right")
    assert _named(g) == [("AAA", "CCC"), ("CCC", "GGG"), ("TTT", "CCC")]


def test_update_drops_empty_products():
    g = _one_update("CCCGGG", "CCCTTT", "left")
    assert sorted(g.seqs.values()) == ["CCC", "GGG", "TTT"]
    assert _named(g) == [("CCC", "GGG"), ("CCC", "TTT")]


def _absorb_all(g, k, check=False):
    state = _PairState(g, k)
    for v in g.vertices:
        state.add(v)
    for _ in range(100):
        found = find_remnant(g, k)
        if found is None:
            return g
        before = oracles.paths(g.out, g.seqs) if check else None
        _update_graph(g, state, *found)
        if check:
            after = oracles.paths(g.out, g.seqs)
            assert after <= before
            # a dropped path was a tip path that a kept path extends
            for lost in before - after:
                assert any(x.startswith(lost) or x.endswith(lost) for x in after)
    raise AssertionError("remnant absorption did not settle")


def test_remnant_tip_is_absorbed():
    g = IsoformGraph.from_parts(["AAAA", "CCGTT", "CC"], [(0, 1), (0, 2)])
    assert find_remnant(g, 3) == (1, 2, (1, 2), "left")
    g = _absorb_all(g, 3)
    assert _named(g) == [("AAAA", "CC"), ("CC", "GTT")]
    mirror = IsoformGraph.from_parts(["TTGCC", "CC", "AAAA"], [(0, 2), (1, 2)])
    assert find_remnant(mirror, 3) == (0, 1, (4, 2), "right")


def test_remnant_that_would_join_paths_is_kept():
    # the lone base could close either branch; taking it would spell GGG A TTT
    g = IsoformGraph.from_parts(["GGG", "A", "CCA", "TTT", "AAC"], [(0, 1), (1, 3), (2, 3), (2, 4)])
    assert find_remnant(g, 3) is None
    assert find_remnant(g, 2) is None


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_remnant_absorption_spells_no_new_path(data):
    n = data.draw(st.integers(1, 8))
    seqs = [data.draw(st.text(alphabet="AC", min_size=1, max_size=4)) for _ in range(n)]
    pairs = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))
    g = IsoformGraph.from_parts(seqs, [(a, b) for a, b in pairs if a < b])
    _absorb_all(g, 3, check=True)


def test_single_backbone_graph():
    b = build_graph(["ACGTACGTTTGCA"], K3)
    assert list(b.graph.seqs.values()) == ["ACGTACGTTTGCA"] and b.graph.edges == []


def test_merge_examples():
    chain = merge_vertices(IsoformGraph.from_parts(["A", "B", "C"], [(0, 1), (1, 2)]))
    assert list(chain.seqs.values()) == ["ABC"] and chain.edges == []
    diamond = IsoformGraph.from_parts(["a", "b", "c", "d"], [(0, 1), (0, 2), (1, 3), (2, 3)])
    assert merge_vertices(diamond.copy()).signature() == diamond.signature()
    # the left-patch product: only S1 -> S2 is a sole connection; S2 keeps both exits
    fig3 = IsoformGraph.from_parts(["AAA", "CCC", "GGG", "TTT"], [(0, 1), (1, 2), (1, 3)])
    m = merge_vertices(fig3)
    assert _named(m) == [("AAACCC", "GGG"), ("AAACCC", "TTT")]


def _random_graph(data):
    n = data.draw(st.integers(1, 8))
    seqs = [data.draw(st.text(alphabet="ACGT", min_size=1, max_size=4)) for _ in range(n)]
    edges = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))
    return IsoformGraph.from_parts(seqs, edges)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_merge_idempotent_and_complete(data):
    g = merge_vertices(_random_graph(data))
    assert merge_vertices(g.copy()).signature() == g.signature()
    for u, v in g.edges:
        assert not (len(g.out[u]) == 1 and len(g.inc[v]) == 1)
        assert u != v


def test_enumerate_examples():
    single = IsoformGraph.from_parts(["ACGT"], [])
    e = enumerate_paths(single)
    assert e.contigs == ["ACGT"] and [s.path for s in e.structures] == [(0,)]
    diamond = IsoformGraph.from_parts(["a", "b", "c", "d"], [(0, 1), (0, 2), (1, 3), (2, 3)])
    assert sorted(enumerate_paths(diamond).contigs) == ["abd", "acd"]


def test_enumerate_cap_and_cycles():
    # a ladder of 6 bubbles has 64 paths
    seqs, edges = [], []
    prev = None
    for i in range(7):
        seqs.append(f"s{i}")
        hub = len(seqs) - 1
        if prev is not None:
            seqs += [f"x{i}", f"y{i}"]
            edges += [(prev, hub - 0 + 1), (prev, hub + 2), (hub + 1, hub), (hub + 2, hub)]
        prev = hub
    g = IsoformGraph.from_parts(seqs, edges)
    full = enumerate_paths(g, 10**6)
    capped = enumerate_paths(g, 8)
    assert not full.truncated and capped.truncated
    assert len(capped.contigs) <= 8
    assert set(capped.contigs) <= set(full.contigs)
    loop = IsoformGraph.from_parts(["a", "b", "c"], [(0, 1), (1, 2), (2, 1)])
    e = enumerate_paths(loop)
    assert e.truncated and e.cycles == 1 and e.contigs == ["abc"]
    ring = IsoformGraph.from_parts(["a", "b"], [(0, 1), (1, 0)])
    assert enumerate_paths(ring).contigs == ["ab"]


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_enumerate_matches_exhaustive_dag(data):
    n = data.draw(st.integers(1, 7))
    seqs = [f"<{i}>" for i in range(n)]
    edges = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(
        lambda e: e[0] < e[1]), max_size=10, unique=True))
    g = IsoformGraph.from_parts(seqs, edges)
    e = enumerate_paths(g, 10**6)
    assert set(e.contigs) == oracles.paths(g.out, g.seqs)
    for st_ in e.structures:
        assert not g.inc[st_.path[0]] and not g.out[st_.path[-1]]
        assert all(b in g.out[a] for a, b in zip(st_.path, st_.path[1:]))


def figure2_backbones(rng=None):
    models, genome = build(figure2_specs(), seed=0)
    transcripts = models[0].transcripts(genome)
    reads = [(r.id, r.seq) for r in tiling_reads(transcripts)]
    return transcripts, reads, seed_and_grow(reads, EXACT, rng)


def test_figure2_enumerates_three_isoforms():
    transcripts, _, bbs = figure2_backbones()
    b = build_graph([bb.seq for bb in bbs], EXACT)
    contigs = enumerate_paths(b.graph).contigs
    assert sorted(contigs) == sorted(s for _, s in transcripts)


def test_edges_have_read_evidence_and_reads_are_covered():
    transcripts, reads, bbs = figure2_backbones()
    g = build_graph([bb.seq for bb in bbs], EXACT).graph
    contigs = enumerate_paths(g).contigs
    for u, v in g.edges:
        joint = g.seqs[u] + g.seqs[v]
        assert any(s in joint for _, s in reads)
    for _, s in reads:
        assert any(cover(s, c, EXACT) is not None for c in contigs)


def test_optimized_build_matches_naive_reference():
    _, _, bbs = figure2_backbones(np.random.default_rng(1))
    seqs = [bb.seq for bb in bbs]
    rng = np.random.default_rng(2)
    seqs += [s[a:a + 120] for s in seqs for a in rng.integers(0, max(1, len(s) - 120), size=2)]
    for n in range(1, len(seqs) + 1):
        fast = build_graph(seqs[:n], EXACT).graph
        slow = naive_build_graph(seqs[:n], EXACT).graph
        assert fast.signature() == slow.signature()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([OverlapParams(12, 0.0, 0), OverlapParams(12, 0.1, 1)]))
def test_optimized_build_matches_naive_random(seed, params):
    rng = np.random.default_rng(seed)
    base = rand(200, seed)
    seqs = []
    for _ in range(int(rng.integers(2, 6))):
        a, b = sorted(int(x) for x in rng.integers(0, 200, size=2))
        if b - a < 15:
            continue
        s = list(base[a:b])
        if params.e1 and rng.random() < 0.5:
            i = int(rng.integers(0, len(s)))
            s[i] = "ACGT"[("ACGT".index(s[i]) + 1) % 4]
        seqs.append("".join(s) + rand(int(rng.integers(0, 20)), seed + 1))
    assert build_graph(seqs, params).graph.signature() == naive_build_graph(seqs, params).graph.signature()


def test_exports():
    g = IsoformGraph.from_parts(["AC", "GT"], [(0, 1)])
    gfa = to_gfa(g, "L0_")
    assert "S\tL0_0\tAC" in gfa and "L\tL0_0\t+\tL0_1\t+\t0M" in gfa
    dot = to_dot(g)
    assert "v0 -> v1;" in dot
