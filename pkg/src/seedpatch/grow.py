"""Stage II: grow backbone sequences from seed reads by greedy extension."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .overlap import OverlapParams, count_mismatches, seed_length


@dataclass
class Backbone:
    seq: str
    seed_id: str
    covered_read_ids: set[str] = field(default_factory=set)
    left_pad_read: str | None = None
    right_pad_read: str | None = None


class ReadPool:
    """Reads of one bin with active flags and piece indexes for fast ext/cover.

    Each read is indexed by disjoint length-``q`` pieces counted from its
    start (for right extension and cover) and from its end (for left
    extension). ``q`` comes from :func:`seed_length`, so every window the
    error budget accepts still contains one intact piece and the lookups
    find every candidate the brute-force definitions would.
    """

    def __init__(self, reads: Sequence[tuple[str, str]], params: OverlapParams):
        self.params = params
        self.ids = [rid for rid, _ in reads]
        self.seqs = [seq for _, seq in reads]
        self.active = [True] * len(self.seqs)
        self.n_active = len(self.seqs)
        lens = [len(s) for s in self.seqs] or [params.k]
        self.max_len = max(lens)
        self.q = seed_length(params, min(lens), self.max_len)
        q = self.q
        self.head: dict[str, list[tuple[int, int]]] = defaultdict(list)
        self.tail: dict[str, list[tuple[int, int]]] = defaultdict(list)
        for r, s in enumerate(self.seqs):
            n = len(s)
            for o in range(0, n - q + 1, q):
                self.head[s[o:o + q]].append((r, o))
                self.tail[s[n - o - q:n - o]].append((r, o))
        self.head = dict(self.head)
        self.tail = dict(self.tail)

    def __len__(self):
        return len(self.seqs)

    def _best(self, cands, P, left, use_active):
        params = self.params
        k = params.k
        e2 = params.e2
        best = None
        best_gain = 0
        for r in sorted(cands):
            if use_active and not self.active[r]:
                continue
            t = self.seqs[r]
            top = min(len(P), len(t))
            for l_o in sorted(cands[r], reverse=True):
                if l_o < k or l_o > top:
                    continue
                if left:
                    a, b = t[len(t) - l_o:], P[:l_o]
                else:
                    a, b = P[len(P) - l_o:], t[:l_o]
                if count_mismatches(a, b, params.budget(l_o), e2) >= 0:
                    gain = len(t) - l_o
                    if gain > best_gain:
                        best, best_gain = (r, l_o), gain
                    break
        return best

    def ext_right(self, P: str, use_active: bool = True) -> tuple[int, int] | None:
        q = self.q
        n = len(P)
        cands: dict[int, set[int]] = defaultdict(set)
        head = self.head
        active = self.active
        for j in range(max(0, n - self.max_len), n - q + 1):
            hits = head.get(P[j:j + q])
            if hits:
                for r, o in hits:
                    if use_active and not active[r]:
                        continue
                    cands[r].add(n - j + o)
        return self._best(cands, P, left=False, use_active=use_active)

    def ext_left(self, P: str, use_active: bool = True) -> tuple[int, int] | None:
        q = self.q
        cands: dict[int, set[int]] = defaultdict(set)
        tail = self.tail
        active = self.active
        for j in range(0, min(len(P), self.max_len) - q + 1):
            hits = tail.get(P[j:j + q])
            if hits:
                for r, o in hits:
                    if use_active and not active[r]:
                        continue
                    cands[r].add(j + o + q)
        return self._best(cands, P, left=True, use_active=use_active)

    def covered_active(self, W: str) -> list[int]:
        """Active reads covered by ``W`` (within the error budget), in input order."""
        q = self.q
        params = self.params
        head = self.head
        active = self.active
        seqs = self.seqs
        n = len(W)
        cands: dict[int, set[int]] = defaultdict(set)
        for j in range(0, n - q + 1):
            hits = head.get(W[j:j + q])
            if hits:
                for r, o in hits:
                    if active[r]:
                        s = j - o
                        if 0 <= s and s + len(seqs[r]) <= n:
                            cands[r].add(s)
        out = []
        for r in sorted(cands):
            t = seqs[r]
            budget = params.budget(len(t))
            for s in sorted(cands[r]):
                if count_mismatches(t, W[s:s + len(t)], budget, params.e2) >= 0:
                    out.append(r)
                    break
        return out

    def deactivate(self, r: int):
        if self.active[r]:
            self.active[r] = False
            self.n_active -= 1


def grow_one(pool: ReadPool, seed: int) -> Backbone:
    """Grow one backbone from read ``seed``: left to fixation, then right."""
    seqs = pool.seqs
    covered: list[int] = []

    def sweep(window):
        for r in pool.covered_active(window):
            pool.deactivate(r)
            covered.append(r)

    S = seqs[seed]
    cur = seed
    while True:
        hit = pool.ext_left(seqs[cur])
        if hit is None:
            break
        r, l_o = hit
        t = seqs[r]
        S = t[:len(t) - l_o] + S
        sweep(t[:len(t) - l_o] + seqs[cur])
        cur = r
    cur = seed
    while True:
        hit = pool.ext_right(seqs[cur])
        if hit is None:
            break
        r, l_o = hit
        S = S + seqs[r][l_o:]
        sweep(seqs[cur] + seqs[r][l_o:])
        cur = r
    sweep(S)
    if pool.active[seed]:
        pool.deactivate(seed)
        covered.append(seed)
    return Backbone(S, pool.ids[seed], {pool.ids[r] for r in covered})


def grow_all(pool: ReadPool, order: Sequence[int] | None = None,
             seedable: Sequence[bool] | None = None) -> list[Backbone]:
    """Grow backbones until no seedable read is active; ``order`` sets seed preference.

    Reads outside ``seedable`` may still extend or be covered by a backbone,
    but never start one; any left active are unassembled.
    """
    order = range(len(pool)) if order is None else order
    backbones = []
    for r in order:
        if pool.n_active == 0:
            break
        if pool.active[r] and (seedable is None or seedable[r]):
            backbones.append(grow_one(pool, r))
    return backbones


def finalize(backbones: list[Backbone], pool: ReadPool) -> list[Backbone]:
    """Extend each backbone once per side by the best-extending inactive read."""
    out = []
    L = pool.max_len
    for bb in backbones:
        S = bb.seq
        left_pad = right_pad = None
        hit = pool.ext_left(S[:L], use_active=False)
        if hit is not None:
            r, l_o = hit
            t = pool.seqs[r]
            S = t[:len(t) - l_o] + S
            left_pad = pool.ids[r]
        hit = pool.ext_right(S[-L:], use_active=False)
        if hit is not None:
            r, l_o = hit
            S = S + pool.seqs[r][l_o:]
            right_pad = pool.ids[r]
        out.append(Backbone(S, bb.seed_id, set(bb.covered_read_ids), left_pad, right_pad))
    return out


def seed_and_grow(reads: Sequence[tuple[str, str]], params: OverlapParams,
                  rng=None, seedable: Sequence[bool] | None = None) -> list[Backbone]:
    """Stage II for one bin: grow every backbone, then pad both ends.

    With ``rng`` (a numpy Generator) the seed order is a random permutation
    instead of input order. ``seedable`` runs parallel to ``reads``.
    """
    if seedable is None:
        seedable = [True] * len(reads)
    keep = [(read, ok) for read, ok in zip(reads, seedable) if len(read[1]) >= params.k]
    if not keep:
        return []
    pool = ReadPool([read for read, _ in keep], params)
    order = None
    if rng is not None:
        order = [int(i) for i in rng.permutation(len(pool))]
    return finalize(grow_all(pool, order, [ok for _, ok in keep]), pool)
