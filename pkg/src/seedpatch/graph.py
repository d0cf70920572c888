"""Stage III: patch backbones together, cut them into an isoform graph, enumerate paths.

``patch_left``/``patch_right`` and the ``cut`` functions use 1-based window
starts, matching how the cut formulas are usually written; everything else
in the package is 0-based.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .overlap import OverlapParams, seed_length


class Patch(NamedTuple):
    i: int  # 1-based start of the shared window in S
    p: int  # window length


def _find_all(text: str, pattern: str):
    i = text.find(pattern)
    while i >= 0:
        yield i
        i = text.find(pattern, i + 1)


def _longest_window(A: str, B: str, params: OverlapParams, anchor: int) -> int:
    """Largest p >= k such that A[:p] and B[:p] agree within the error budget.

    The window must end on ``anchor`` agreeing positions, also where it runs
    into the end of A or B, so an error-tolerant window cannot creep past
    the point where the two sequences diverge.
    """
    L = min(len(A), len(B))
    k = params.k
    if L < k:
        return 0
    e2 = params.e2
    block = 32
    mism: list[int] = []
    run_start = -1
    run = 0
    limit = L  # windows may not extend past this point
    pos = 0
    while pos < L:
        end = min(pos + block, L)
        if A[pos:end] == B[pos:end] and "N" not in A[pos:end]:
            run = 0
            pos = end
            continue
        stop = False
        for t in range(pos, end):
            x = A[t]
            if x != B[t] or x == "N":
                if run == 0:
                    run_start = t
                run += 1
                mism.append(t)
                if run > e2:
                    limit = run_start + e2
                    stop = True
                    break
            else:
                run = 0
        if stop:
            break
        pos = end
    # candidate window ends: just before each mismatch, or the reachable end
    ends = []
    if limit == L:
        ends.append((L, len(mism)))
    for idx in range(len(mism) - 1, -1, -1):
        m = mism[idx]
        if m <= limit:
            ends.append((m, idx))
    for p, count in ends:
        if p < k:
            break
        if count > params.budget(p):
            continue
        prev = mism[count - 1] if count else -1
        if p - prev - 1 < min(anchor, p):
            continue
        # the first `count` mismatches all sit inside [0, p); runs are bounded by `limit`
        return p
    return 0


def _anchor_run(params: OverlapParams) -> int:
    return max(1, params.k // 3)


def _patch(S_prime: str, S: str, params: OverlapParams, right: bool) -> Patch | None:
    if right:
        S_prime = S_prime[::-1]
        S = S[::-1]
    k = params.k
    if len(S_prime) < k or len(S) < k:
        return None
    q = seed_length(params, k, max(len(S_prime), len(S)))
    anchor = _anchor_run(params)
    starts = set()
    for o in range(0, len(S_prime) - q + 1, q):
        piece = S_prime[o:o + q]
        for hit in _find_all(S, piece):
            i = hit - o
            if 0 <= i <= len(S) - k:
                starts.add(i)
    best = None
    for i in starts:
        p = _longest_window(S_prime, S[i:], params, anchor)
        if p == 0:
            continue
        i0 = len(S) - i - p if right else i
        if best is None or p > best[1] or (p == best[1] and i0 < best[0]):
            best = (i0, p)
    if best is None:
        return None
    return Patch(best[0] + 1, best[1])


def patch_left(S_prime: str, S: str, params: OverlapParams) -> Patch | None:
    """Longest window where a prefix of ``S_prime`` recurs inside ``S``."""
    return _patch(S_prime, S, params, right=False)


def patch_right(S_prime: str, S: str, params: OverlapParams) -> Patch | None:
    """Longest window where a suffix of ``S_prime`` recurs inside ``S``."""
    return _patch(S_prime, S, params, right=True)


def _check_cut(S_prime, S, i, p):
    if i < 1 or p < 1 or i + p - 1 > len(S) or p > len(S_prime):
        raise ValueError(f"cut window (i={i}, p={p}) out of range for |S|={len(S)}, |S'|={len(S_prime)}")


def cut_left(S_prime: str, S: str, i: int, p: int) -> tuple[str, str, str, str]:
    _check_cut(S_prime, S, i, p)
    return S[:i - 1], S[i - 1:i - 1 + p], S[i - 1 + p:], S_prime[p:]


def cut_right(S_prime: str, S: str, i: int, p: int) -> tuple[str, str, str, str]:
    _check_cut(S_prime, S, i, p)
    return S[:i - 1], S[i - 1:i - 1 + p], S[i - 1 + p:], S_prime[:len(S_prime) - p]


def joint(*seqs: str) -> str:
    return "".join(seqs)


class IsoformGraph:
    """Directed graph of sequence vertices; ids are handed out in creation order."""

    def __init__(self):
        self.seqs: dict[int, str] = {}
        self.out: dict[int, set[int]] = {}
        self.inc: dict[int, set[int]] = {}
        self._next = 0

    def add_vertex(self, seq: str) -> int:
        vid = self._next
        self._next += 1
        self.seqs[vid] = seq
        self.out[vid] = set()
        self.inc[vid] = set()
        return vid

    def remove_vertex(self, v: int):
        for u in self.inc.pop(v):
            self.out[u].discard(v)
        for w in self.out.pop(v):
            self.inc[w].discard(v)
        del self.seqs[v]

    def add_edge(self, u: int, v: int):
        if u == v:
            return
        self.out[u].add(v)
        self.inc[v].add(u)

    def __contains__(self, v):
        return v in self.seqs

    def __len__(self):
        return len(self.seqs)

    @property
    def vertices(self) -> list[int]:
        return sorted(self.seqs)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in self.out for v in self.out[u])

    def copy(self) -> "IsoformGraph":
        g = IsoformGraph()
        g.seqs = dict(self.seqs)
        g.out = {v: set(s) for v, s in self.out.items()}
        g.inc = {v: set(s) for v, s in self.inc.items()}
        g._next = self._next
        return g

    def signature(self) -> tuple:
        """Id-free description used to compare graphs."""
        edges = sorted((self.seqs[u], self.seqs[v]) for u, v in self.edges)
        return tuple(sorted(self.seqs.values())), tuple(edges)

    @classmethod
    def from_parts(cls, seqs: Iterable[str], edges: Iterable[tuple[int, int]]) -> "IsoformGraph":
        g = cls()
        for s in seqs:
            g.add_vertex(s)
        for u, v in edges:
            g.add_edge(u, v)
        return g


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass
class GraphBuild:
    graph: IsoformGraph
    patches: int = 0
    remnants: int = 0
    suppressed: list[tuple] = field(default_factory=list)  # (S id, S' id, dir) alternatives not taken


class _PairState:
    """Unknown flags plus a q-mer index that rules out pairs which cannot patch.

    A patch window of length >= k holds an error-free q-piece, so two
    vertices sharing no q-mer can never patch; their pairs are settled
    without a test. Cut products are substrings of their parents, so a pair
    settled this way stays settled after any number of cuts.
    """

    def __init__(self, g: IsoformGraph, q: int):
        self.g = g
        self.q = q
        self.unknown: dict[int, set[int]] = {}
        self.kmers: dict[int, set[str]] = {}
        self.postings: dict[str, set[int]] = {}
        self.queue: deque[tuple[int, int]] = deque()

    def add(self, v: int):
        q = self.q
        seq = self.g.seqs[v]
        kms = {seq[t:t + q] for t in range(len(seq) - q + 1)}
        self.kmers[v] = kms
        for km in kms:
            self.postings.setdefault(km, set()).add(v)
        self.unknown[v] = set()

    def drop(self, v: int):
        for km in self.kmers.pop(v):
            bucket = self.postings[km]
            bucket.discard(v)
            if not bucket:
                del self.postings[km]
        for n in self.unknown.pop(v):
            self.unknown[n].discard(v)

    def neighbours(self, v: int) -> set[int]:
        out = set()
        for km in self.kmers[v]:
            out |= self.postings[km]
        out.discard(v)
        return out

    def flag(self, a: int, b: int):
        if a == b or b in self.unknown[a]:
            return
        if self.kmers[a].isdisjoint(self.kmers[b]):
            return
        self.unknown[a].add(b)
        self.unknown[b].add(a)
        self.queue.append(_pair(a, b))

    def settle(self, a: int, b: int) -> bool:
        """Mark the pair known; False if it was not pending."""
        if a not in self.unknown or b not in self.unknown[a]:
            return False
        self.unknown[a].discard(b)
        self.unknown[b].discard(a)
        return True


def _update_graph(g: IsoformGraph, state: _PairState, vi: int, vj: int, patch: Patch, direction: str):
    S, Sp = g.seqs[vi], g.seqs[vj]
    cut = cut_left if direction == "left" else cut_right
    pieces = cut(Sp, S, patch.i, patch.p)
    new = [g.add_vertex(s) if s else None for s in pieces]
    v1, v2, v3, v4 = new
    # vi becomes v1 -> v2 -> v3; vj becomes v2 -> v4 (left) or v4 -> v2 (right)
    vi_first = v1 if v1 is not None else v2
    vi_last = v3 if v3 is not None else v2
    if direction == "left":
        vj_first, vj_last = v2, (v4 if v4 is not None else v2)
    else:
        vj_first, vj_last = (v4 if v4 is not None else v2), v2

    def remap_target(x):
        if x == vi:
            return vi_first
        if x == vj:
            return vj_first
        return x

    def remap_source(x):
        if x == vi:
            return vi_last
        if x == vj:
            return vj_last
        return x

    old_edges = [(u, v0) for v0 in (vi, vj) for u in g.inc[v0]]
    old_edges += [(u0, v) for u0 in (vi, vj) for v in g.out[u0]]
    inherit_i = sorted(state.unknown[vi] - {vj})
    inherit_j = sorted(state.unknown[vj] - {vi})
    state.drop(vi)
    state.drop(vj)
    g.remove_vertex(vi)
    g.remove_vertex(vj)
    for v in new:
        if v is not None:
            state.add(v)
    for u, v in old_edges:
        g.add_edge(remap_source(u), remap_target(v))
    if v1 is not None:
        g.add_edge(v1, v2)
    if v3 is not None:
        g.add_edge(v2, v3)
    if v4 is not None:
        if direction == "left":
            g.add_edge(v2, v4)
        else:
            g.add_edge(v4, v2)
    # flags: v1/v2/v3 inherit from vi, v2/v4 from vj; unknown wins on v2
    inherit = {}
    for n in inherit_i:
        inherit.setdefault(n, set()).update((0, 1, 2))
    for n in inherit_j:
        inherit.setdefault(n, set()).update((1, 3))
    for n in sorted(inherit):
        for idx in sorted(inherit[n]):
            if new[idx] is not None:
                state.flag(new[idx], n)
    if v3 is not None and v4 is not None:
        state.flag(v3, v4)


def _try_patch(g: IsoformGraph, a: int, b: int, params: OverlapParams, build: GraphBuild):
    found = None
    for vi, vj in ((a, b), (b, a)):
        S, Sp = g.seqs[vi], g.seqs[vj]
        for direction, fn in (("left", patch_left), ("right", patch_right)):
            patch = fn(Sp, S, params)
            if patch is None:
                continue
            if found is None:
                found = (vi, vj, patch, direction)
            else:
                build.suppressed.append((vi, vj, direction, patch))
        if found is not None:
            break
    return found


def build_graph(sequences: Iterable[str], params: OverlapParams) -> GraphBuild:
    """Patch-and-cut every pair of vertices until no untested pair admits a patch, then merge."""
    g = IsoformGraph()
    for s in sequences:
        if s:
            g.add_vertex(s)
    build = GraphBuild(g)
    if not len(g):
        return build
    # cuts only shorten vertices, so a q that is complete for the longest input stays complete
    q = seed_length(params, params.k, max(len(s) for s in g.seqs.values()))
    state = _PairState(g, q)
    ids = g.vertices
    for v in ids:
        state.add(v)
    for x in ids:
        for y in sorted(n for n in state.neighbours(x) if n > x):
            state.flag(x, y)
    while True:
        while state.queue:
            a, b = state.queue.popleft()
            if a not in g or b not in g or not state.settle(a, b):
                continue
            found = _try_patch(g, a, b, params, build)
            if found is None:
                continue
            vi, vj, patch, direction = found
            _update_graph(g, state, vi, vj, patch, direction)
            build.patches += 1
        found = find_remnant(g, params.k)
        if found is None:
            break
        _update_graph(g, state, *found)
        build.remnants += 1
    merge_vertices(g)
    return build


def find_remnant(g: IsoformGraph, k: int):
    """A vertex shorter than k that a sibling branch already spells.

    A backbone that overhangs the vertex it patches leaves a remnant too
    short for any further patch. If the remnant t hangs off u and another
    successor w of u starts with t, the branch point really lies after t:
    cutting w behind |t| bases and taking t as that piece is the cut of a
    whole-vertex left patch. The mirror case uses a predecessor ending with t.
    A move is taken only if it spells no new path, so t must share its
    predecessors with w, or be a tip whose predecessors w already has; a
    one or two base remnant says too little to join anything else.
    Returns ``(w, t, patch, direction)`` or None.
    """
    for t in g.vertices:
        s = g.seqs[t]
        if len(s) >= k:
            continue
        for u in sorted(g.inc[t]):
            for w in sorted(g.out[u]):
                if w != t and g.seqs[w].startswith(s) and _absorbs(g.inc[t], g.inc[w], g.out[t]):
                    return w, t, Patch(1, len(s)), "left"
        for v in sorted(g.out[t]):
            for w in sorted(g.inc[v]):
                if w != t and g.seqs[w].endswith(s) and _absorbs(g.out[t], g.out[w], g.inc[t]):
                    return w, t, Patch(len(g.seqs[w]) - len(s) + 1, len(s)), "right"
    return None


def _absorbs(near_t: set[int], near_w: set[int], far_t: set[int]) -> bool:
    return near_t == near_w or (not far_t and near_t <= near_w)


def merge_vertices(g: IsoformGraph) -> IsoformGraph:
    """Collapse every edge that is the only way out of its tail and the only way into its head."""
    while True:
        target = None
        for u in g.vertices:
            outs = g.out[u]
            if len(outs) == 1:
                (v,) = outs
                if v != u and len(g.inc[v]) == 1:
                    target = (u, v)
                    break
        if target is None:
            return g
        u, v = target
        m = g.add_vertex(g.seqs[u] + g.seqs[v])
        preds = [x for x in g.inc[u] if x not in (u, v)]
        succs = [x for x in g.out[v] if x not in (u, v)]
        # an edge v -> u would become a self-edge on m and is dropped
        g.remove_vertex(u)
        g.remove_vertex(v)
        for x in preds:
            g.add_edge(x, m)
        for x in succs:
            g.add_edge(m, x)


@dataclass
class IsoformStructure:
    path: tuple[int, ...]
    truncated: bool = False


@dataclass
class Enumeration:
    structures: list[IsoformStructure]
    contigs: list[str]
    truncated: bool = False
    cycles: int = 0


def _sources(g: IsoformGraph) -> list[int]:
    srcs = [v for v in g.vertices if not g.inc[v]]
    # components made only of cycles have no source; start them at their oldest vertex
    seen = set()
    stack = list(srcs)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(g.out[v])
    for v in g.vertices:
        if v in seen:
            continue
        srcs.append(v)
        comp = [v]
        while comp:
            x = comp.pop()
            if x in seen:
                continue
            seen.add(x)
            comp.extend(g.out[x])
            comp.extend(g.inc[x])
    return srcs


def enumerate_paths(g: IsoformGraph, max_paths: int = 64) -> Enumeration:
    """Breadth-first expansion of source-to-sink paths.

    Once the number of live paths would pass ``max_paths``, branching stops:
    each remaining partial path follows only its lowest-id successor. A path
    that would revisit a vertex ends there and is flagged truncated.
    """
    done: list[IsoformStructure] = []
    queue = deque((v,) for v in _sources(g))
    capped = False
    cycles = 0
    while queue:
        path = queue.popleft()
        last = path[-1]
        succs = sorted(g.out[last])
        if not succs:
            done.append(IsoformStructure(path))
            continue
        fresh = [s for s in succs if s not in path]
        if len(fresh) < len(succs):
            cycles += 1
        if not fresh:
            done.append(IsoformStructure(path, truncated=True))
            continue
        if not capped and len(done) + len(queue) + len(fresh) > max_paths:
            capped = True
        if capped:
            fresh = fresh[:1]
        for s in fresh:
            queue.append(path + (s,))
    contigs = [joint(*(g.seqs[v] for v in st.path)) for st in done]
    return Enumeration(done, contigs, capped or cycles > 0, cycles)


def to_gfa(g: IsoformGraph, name: str = "") -> str:
    lines = ["H\tVN:Z:1.0"]
    for v in g.vertices:
        lines.append(f"S\t{name}{v}\t{g.seqs[v]}")
    for u, v in g.edges:
        lines.append(f"L\t{name}{u}\t+\t{name}{v}\t+\t0M")
    return "\n".join(lines) + "\n"


def to_dot(g: IsoformGraph, name: str = "isoforms") -> str:
    lines = [f'digraph "{name}" {{']
    for v in g.vertices:
        lines.append(f'  v{v} [label="v{v} ({len(g.seqs[v])} bp)"];')
    for u, v in g.edges:
        lines.append(f"  v{u} -> v{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
