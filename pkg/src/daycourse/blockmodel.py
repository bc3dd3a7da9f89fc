"""Bipartite topic inference with a nested degree-corrected blockmodel.

Documents and words are the two sides of a multigraph whose edge
multiplicities are token counts. A hierarchy of partitions (level 0 finest,
every level refining the one above, no block ever mixing sides) is scored by
its description length in nats:

    sigma = S_adj + L_deg + sum_l L_part(l) + sum_{l>=1} L_edge(l) + L_top

with

    S_adj     = sum_r ln e_r! - sum_{r<s} ln e_rs!
                - sum_i ln k_i! + sum_{i<j} ln A_ij!
    L_deg     = sum_r ln multiset(n_r, e_r)
    L_part(l) = ln C(M_l - 1, B_l - 1) + ln M_l + ln M_l! - sum_r ln n_r!
    L_edge(l) = sum_{r<=s} ln multiset(n_r * n_s slots, e_rs at level l)
    L_top     = ln multiset(B_top (B_top + 1) / 2, E)

where e_rs are block edge counts, e_r block degree sums, n_r block sizes,
multiset(n, m) = C(n + m - 1, m), M_0 = N and M_l = B_{l-1}. S_adj is the
microcanonical entropy of degree-corrected multigraphs, L_deg a uniform prior
over block degree sequences, and levels above 0 encode the block multigraph
below them without degree correction. Lower sigma means a better model, so
inference is sigma minimization: greedy agglomerative initialization followed
by Metropolis-Hastings node moves at inverse temperature 1, with proposals
restricted to same-side blocks so bipartiteness can never break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import lgamma

import numpy as np

from .errors import EmptyGraphError, InconsistentStateError
from .textprep import Corpus

LN2 = math.log(2.0)

DEFAULT_SWEEPS = 1000
DEFAULT_INIT_PASSES = 10
DEFAULT_REFINE_ROUNDS = 5
TOPIC_COUNT_MIN = 2
TOPIC_COUNT_MAX = 50


def _ln_binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        raise ValueError(f"C({n}, {k}) undefined")
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def _ln_multiset(n: int, m: int) -> float:
    """ln of the number of multisets of size m over n kinds."""
    if m == 0:
        return 0.0
    if n <= 0:
        raise ValueError(f"multiset({n}, {m}) undefined")
    return lgamma(n + m) - lgamma(m + 1) - lgamma(n)


def _partition_dl(m_total: int, sizes: list[int]) -> float:
    b = len(sizes)
    value = _ln_binom(m_total - 1, b - 1) + math.log(m_total) + lgamma(m_total + 1)
    for n_r in sizes:
        value -= lgamma(n_r + 1)
    return value


# ---------------------------------------------------------------------------
# Graph


@dataclass
class BipartiteGraph:
    """Document-word multigraph. Nodes 0..n_docs-1 are documents, the rest words."""

    n_docs: int
    n_words: int
    edges: dict[tuple[int, int], int]
    doc_segment_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.n_docs + self.n_words
        degrees = np.zeros(n, dtype=np.int64)
        adjacency: list[dict[int, int]] = [dict() for _ in range(n)]
        for (u, v), w in self.edges.items():
            if not (0 <= u < self.n_docs <= v < n):
                raise InconsistentStateError(f"edge ({u}, {v}) is not document-to-word")
            if w <= 0:
                raise InconsistentStateError(f"edge ({u}, {v}) has multiplicity {w}")
            degrees[u] += w
            degrees[v] += w
            adjacency[u][v] = adjacency[u].get(v, 0) + w
            adjacency[v][u] = adjacency[v].get(u, 0) + w
        self.n_nodes = n
        self.degrees = degrees
        self.adjacency = adjacency
        self.total_edges = int(degrees.sum()) // 2
        # Partition-independent part of sigma: degree and multiplicity factorials.
        self.dl_constant = float(
            sum(lgamma(w + 1) for w in self.edges.values())
            - sum(lgamma(int(k) + 1) for k in degrees)
        )

    def side(self, node: int) -> int:
        return 0 if node < self.n_docs else 1


def build_graph(corpus: Corpus) -> BipartiteGraph:
    """Multigraph over the corpus bags; edge weight = token count in the bag."""
    n_docs = len(corpus.bags)
    n_words = len(corpus.vocabulary)
    edges: dict[tuple[int, int], int] = {}
    for d, bag in enumerate(corpus.bags):
        for word_id, count in sorted(bag.counts.items()):
            edges[(d, n_docs + word_id)] = count
    if not edges:
        raise EmptyGraphError("corpus has no tokens, nothing to model")
    return BipartiteGraph(
        n_docs=n_docs,
        n_words=n_words,
        edges=edges,
        doc_segment_indices=tuple(bag.segment_index for bag in corpus.bags),
    )


# ---------------------------------------------------------------------------
# Block state and description length


@dataclass
class BlockState:
    """A hierarchy of partitions plus its description length.

    levels[0] maps nodes to level-0 blocks; levels[l] maps level-(l-1) blocks
    to level-l blocks, so each level refines the one above by construction.
    """

    levels: list[np.ndarray]
    block_counts: list[int]
    level_edge_counts: list[dict[tuple[int, int], int]]
    sigma: float
    sigma_trace: list[float] = field(default_factory=list)

    @classmethod
    def from_levels(cls, graph: BipartiteGraph, levels: list[list[int] | np.ndarray]) -> "BlockState":
        arrays = [np.asarray(level, dtype=np.int64) for level in levels]
        sigma, counts, edge_counts = _sigma_terms(graph, arrays)
        return cls(
            levels=arrays,
            block_counts=counts,
            level_edge_counts=edge_counts,
            sigma=sigma,
        )


def _validate_level(assignment: np.ndarray, n_items: int, what: str) -> int:
    if assignment.shape != (n_items,):
        raise InconsistentStateError(
            f"{what}: expected {n_items} assignments, got {assignment.shape}"
        )
    if n_items == 0:
        raise InconsistentStateError(f"{what}: empty level")
    b = int(assignment.max()) + 1
    if int(assignment.min()) < 0 or len(np.unique(assignment)) != b:
        raise InconsistentStateError(f"{what}: block labels must be dense 0..B-1")
    return b


def _sigma_terms(
    graph: BipartiteGraph, levels: list[np.ndarray]
) -> tuple[float, list[int], list[dict[tuple[int, int], int]]]:
    """Description length plus per-level block counts and edge-count matrices."""
    if not levels:
        raise InconsistentStateError("state has no levels")
    if graph.total_edges == 0:
        raise EmptyGraphError("graph has no edges")

    sides = np.array([graph.side(i) for i in range(graph.n_nodes)], dtype=np.int8)
    edge_list = [(u, v, w) for (u, v), w in graph.edges.items()]
    strengths = graph.degrees.copy()
    total = graph.dl_constant
    counts: list[int] = []
    edge_count_views: list[dict[tuple[int, int], int]] = []

    for depth, assignment in enumerate(levels):
        n_items = len(sides)
        b = _validate_level(assignment, n_items, f"level {depth}")
        counts.append(b)

        block_sides = np.full(b, -1, dtype=np.int8)
        for item in range(n_items):
            r = int(assignment[item])
            if block_sides[r] == -1:
                block_sides[r] = sides[item]
            elif block_sides[r] != sides[item]:
                raise InconsistentStateError(f"level {depth}: block {r} mixes sides")

        e_str = np.zeros(b, dtype=np.int64)
        np.add.at(e_str, assignment, strengths)
        pair: dict[tuple[int, int], int] = {}
        for u, v, w in edge_list:
            r, s = int(assignment[u]), int(assignment[v])
            if r == s:
                raise InconsistentStateError(f"level {depth}: block {r} holds both edge ends")
            key = (r, s) if r < s else (s, r)
            pair[key] = pair.get(key, 0) + w
        edge_count_views.append(dict(sorted(pair.items())))

        raw_sizes = np.zeros(b, dtype=np.int64)
        np.add.at(raw_sizes, assignment, 1)
        total += _partition_dl(n_items, [int(x) for x in raw_sizes])
        if depth == 0:
            total += float(sum(lgamma(int(e) + 1) for e in e_str))
            total -= float(sum(lgamma(m + 1) for m in pair.values()))
            total += float(sum(_ln_multiset(int(n), int(e)) for n, e in zip(raw_sizes, e_str)))
        else:
            for (r, s), m in pair.items():
                total += _ln_multiset(int(raw_sizes[r]) * int(raw_sizes[s]), m)

        # Aggregates become the item set of the next level up.
        sides = block_sides
        strengths = e_str
        edge_list = [(r, s, m) for (r, s), m in pair.items()]

    b_top = counts[-1]
    total += _ln_multiset(b_top * (b_top + 1) // 2, graph.total_edges)
    return float(total), counts, edge_count_views


def description_length(graph: BipartiteGraph, state: BlockState) -> float:
    """Exact sigma in nats for the state's hierarchy on this graph."""
    sigma, _, _ = _sigma_terms(graph, state.levels)
    return sigma


# ---------------------------------------------------------------------------
# Incremental single-level engine


class _LevelState:
    """One hierarchy level under optimization, with O(degree) move evaluation.

    Levels below are frozen, so the only sigma terms that move are the ones
    this partition controls: adjacency and degree terms for level 0
    (dc=True), multiset edge-placement terms for upper levels (dc=False),
    plus the partition prior and the top-level edge-matrix term.
    """

    def __init__(
        self,
        sides: list[int],
        strengths: list[int],
        edge_list: list[tuple[int, int, int]],
        total_edges: int,
        dc: bool,
    ):
        self.M = len(sides)
        self.sides = list(sides)
        self.k = list(strengths)
        self.E = total_edges
        self.dc = dc
        self.adj: list[dict[int, int]] = [dict() for _ in range(self.M)]
        for u, v, w in edge_list:
            if self.sides[u] == self.sides[v]:
                raise InconsistentStateError("same-side edge in bipartite level")
            self.adj[u][v] = self.adj[u].get(v, 0) + w
            self.adj[v][u] = self.adj[v].get(u, 0) + w
        # Per-node half-edge tables for weighted neighbor sampling.
        self.nbr_nodes: list[np.ndarray] = []
        self.nbr_cumw: list[np.ndarray] = []
        for u in range(self.M):
            items = sorted(self.adj[u].items())
            self.nbr_nodes.append(np.array([n for n, _ in items], dtype=np.int64))
            self.nbr_cumw.append(np.cumsum([w for _, w in items], dtype=np.int64))

        # Singleton start: block id = node id.
        self.b = list(range(self.M))
        self.n = {v: 1 for v in range(self.M)}
        self.e = {v: self.k[v] for v in range(self.M)}
        self.members: dict[int, set[int]] = {v: {v} for v in range(self.M)}
        self.block_side = {v: self.sides[v] for v in range(self.M)}
        self.row: dict[int, dict[int, int]] = {v: dict(self.adj[v]) for v in range(self.M)}
        self.side_lists: dict[int, list[int]] = {0: [], 1: []}
        self.side_pos: dict[int, int] = {}
        for v in range(self.M):
            self._track_block(v)
        self.B = self.M
        self.next_id = self.M

    # -- block bookkeeping

    def _track_block(self, r: int) -> None:
        lst = self.side_lists[self.block_side[r]]
        self.side_pos[r] = len(lst)
        lst.append(r)

    def _untrack_block(self, r: int) -> None:
        lst = self.side_lists[self.block_side[r]]
        pos = self.side_pos.pop(r)
        last = lst.pop()
        if last != r:
            lst[pos] = last
            self.side_pos[last] = pos

    def assignment(self) -> list[int]:
        return list(self.b)

    def set_assignment(self, assignment: list[int]) -> None:
        """Rebuild all aggregates for a given block labeling."""
        self.b = list(assignment)
        labels = sorted(set(self.b))
        self.n = {r: 0 for r in labels}
        self.e = {r: 0 for r in labels}
        self.members = {r: set() for r in labels}
        self.block_side = {}
        self.row = {r: dict() for r in labels}
        for v, r in enumerate(self.b):
            self.n[r] += 1
            self.e[r] += self.k[v]
            self.members[r].add(v)
            side = self.sides[v]
            if self.block_side.setdefault(r, side) != side:
                raise InconsistentStateError(f"block {r} mixes sides")
        for u in range(self.M):
            ru = self.b[u]
            for v, w in self.adj[u].items():
                if u < v:
                    rv = self.b[v]
                    self.row[ru][rv] = self.row[ru].get(rv, 0) + w
                    if ru != rv:
                        self.row[rv][ru] = self.row[rv].get(ru, 0) + w
        self.side_lists = {0: [], 1: []}
        self.side_pos = {}
        for r in labels:
            self._track_block(r)
        self.B = len(labels)
        self.next_id = max(labels) + 1

    # -- objective

    def _block_term(self, n_r: int, e_r: int) -> float:
        """Size and degree dependent terms one block contributes."""
        if n_r == 0:
            return 0.0
        value = -lgamma(n_r + 1)  # partition size factor
        if self.dc:
            value += lgamma(e_r + 1) + _ln_multiset(n_r, e_r)
        return value

    def _pair_term(self, r: int, s: int, n_r: int, n_s: int, m: int) -> float:
        if m == 0:
            return 0.0
        if self.dc:
            if r == s:
                return -(m * LN2 + lgamma(m + 1))  # ln (2m)!! with 2m half-edges
            return -lgamma(m + 1)
        slots = n_r * (n_r + 1) // 2 if r == s else n_r * n_s
        return _ln_multiset(slots, m)

    def _global_term(self, b_count: int) -> float:
        return _ln_binom(self.M - 1, b_count - 1) + _ln_multiset(
            b_count * (b_count + 1) // 2, self.E
        )

    def local_objective(self) -> float:
        total = lgamma(self.M + 1) + math.log(self.M) + self._global_term(self.B)
        for r in self.n:
            total += self._block_term(self.n[r], self.e[r])
        for r, row in self.row.items():
            for s, m in row.items():
                if s < r:
                    continue
                total += self._pair_term(r, s, self.n[r], self.n[s], m)
        return total

    # -- move evaluation

    def _neighbor_block_weights(self, v: int) -> dict[int, int]:
        wt: dict[int, int] = {}
        for u, w in self.adj[v].items():
            t = self.b[u]
            wt[t] = wt.get(t, 0) + w
        return wt

    def delta_move(self, v: int, s: int) -> tuple[float, int, int]:
        """Exact sigma change for moving v to block s (possibly a fresh one).

        Returns (delta, side_count_before, side_count_after) where the side
        counts feed the Hastings correction of the uniform proposal.
        """
        r = self.b[v]
        side = self.sides[v]
        count_before = len(self.side_lists[side])
        if s == r:
            return 0.0, count_before, count_before
        k_v = self.k[v]
        fresh = s not in self.n
        n_r, e_r = self.n[r], self.e[r]
        n_s, e_s = (0, 0) if fresh else (self.n[s], self.e[s])

        delta = 0.0
        delta += self._block_term(n_r - 1, e_r - k_v) - self._block_term(n_r, e_r)
        delta += self._block_term(n_s + 1, e_s + k_v) - self._block_term(n_s, e_s)

        wt = self._neighbor_block_weights(v)
        if self.dc:
            for t, w in wt.items():
                m_rt = self.row[r].get(t, 0)
                m_st = 0 if fresh else self.row[s].get(t, 0)
                delta += lgamma(m_rt + 1) - lgamma(m_rt - w + 1)
                delta += lgamma(m_st + 1) - lgamma(m_st + w + 1)
        else:
            pairs = set()
            for t in self.row[r]:
                pairs.add((r, t) if r <= t else (t, r))
            if not fresh:
                for t in self.row[s]:
                    pairs.add((s, t) if s <= t else (t, s))
            for t in wt:
                pairs.add((r, t) if r <= t else (t, r))
                pairs.add((s, t) if s <= t else (t, s))
            pairs.add((r, s) if r <= s else (s, r))

            def size_old(x: int) -> int:
                if x == s and fresh:
                    return 0
                return self.n[x]

            def size_new(x: int) -> int:
                if x == r:
                    return n_r - 1
                if x == s:
                    return n_s + 1
                return self.n[x]

            def m_old(a: int, c: int) -> int:
                if fresh and (a == s or c == s):
                    return 0
                return self.row[a].get(c, 0) if a in self.row else 0

            for a, c in pairs:
                m = m_old(a, c)
                m_new = m
                for end in {a, c} if a != c else {a}:
                    other = c if end == a else a
                    if end == r and other in wt and other not in (r, s):
                        m_new -= wt[other]
                    if end == s and other in wt and other not in (r, s):
                        m_new += wt[other]
                delta += self._pair_term(a, c, size_new(a), size_new(c), m_new)
                delta -= self._pair_term(a, c, size_old(a), size_old(c), m)

        b_after = self.B - (1 if n_r == 1 else 0) + (1 if fresh else 0)
        if b_after != self.B:
            delta += self._global_term(b_after) - self._global_term(self.B)
        count_after = count_before - (1 if n_r == 1 else 0) + (1 if fresh else 0)
        return delta, count_before, count_after

    def apply_move(self, v: int, s: int) -> None:
        r = self.b[v]
        if s == r:
            return
        k_v = self.k[v]
        fresh = s not in self.n
        if fresh:
            if s != self.next_id:
                raise InconsistentStateError("fresh block id out of sequence")
            self.next_id += 1
            self.n[s] = 0
            self.e[s] = 0
            self.members[s] = set()
            self.row[s] = {}
            self.block_side[s] = self.sides[v]
            self._track_block(s)
            self.B += 1
        wt = self._neighbor_block_weights(v)
        self.n[r] -= 1
        self.e[r] -= k_v
        self.members[r].discard(v)
        self.n[s] += 1
        self.e[s] += k_v
        self.members[s].add(v)
        self.b[v] = s
        for t, w in wt.items():
            m = self.row[r][t] - w
            if m:
                self.row[r][t] = m
                self.row[t][r] = m
            else:
                del self.row[r][t]
                del self.row[t][r]
            m = self.row[s].get(t, 0) + w
            self.row[s][t] = m
            self.row[t][s] = m
        if self.n[r] == 0:
            self._untrack_block(r)
            del self.n[r], self.e[r], self.members[r], self.block_side[r]
            self.row.pop(r, None)
            self.B -= 1

    # -- merge evaluation (agglomerative phase)

    def b_shrink_term(self) -> float:
        """Global-term change of losing one block at the current count."""
        return self._global_term(self.B - 1) - self._global_term(self.B)

    def delta_merge_core(self, r: int, s: int) -> float:
        """Sigma change for merging r into s, excluding the block-count term."""
        if r == s or self.block_side[r] != self.block_side[s]:
            raise InconsistentStateError("merge partners must be distinct same-side blocks")
        n_r, e_r, n_s, e_s = self.n[r], self.e[r], self.n[s], self.e[s]
        delta = (
            self._block_term(n_r + n_s, e_r + e_s)
            - self._block_term(n_r, e_r)
            - self._block_term(n_s, e_s)
        )
        if self.dc:
            # Old pairs (r,t) and (s,t) collapse into one (s,t) pair.
            for t, w in self.row[r].items():
                m_st = self.row[s].get(t, 0)
                delta += -lgamma(m_st + w + 1) + lgamma(m_st + 1) + lgamma(w + 1)
        else:
            pairs = set()
            for t in self.row[r]:
                pairs.add((r, t) if r <= t else (t, r))
            for t in self.row[s]:
                pairs.add((s, t) if s <= t else (t, s))

            def size_new(x: int) -> int:
                if x == s:
                    return n_r + n_s
                if x == r:
                    return 0
                return self.n[x]

            seen_new: set[tuple[int, int]] = set()
            for a, c in pairs:
                delta -= self._pair_term(a, c, self.n[a], self.n[c], self.row[a].get(c, 0))
                a2 = s if a == r else a
                c2 = s if c == r else c
                key = (a2, c2) if a2 <= c2 else (c2, a2)
                if key in seen_new:
                    continue
                seen_new.add(key)
                m_new = self.row[key[0]].get(key[1], 0)
                if key[0] == s or key[1] == s:
                    other = key[1] if key[0] == s else key[0]
                    if other == s:
                        m_new = (
                            self.row[s].get(s, 0)
                            + self.row[r].get(r, 0)
                            + self.row[r].get(s, 0)
                        )
                    else:
                        m_new = self.row[s].get(other, 0) + self.row[r].get(other, 0)
                delta += self._pair_term(key[0], key[1], size_new(key[0]), size_new(key[1]), m_new)
        return delta

    def apply_merge(self, r: int, s: int) -> None:
        for v in self.members[r]:
            self.b[v] = s
        self.members[s].update(self.members[r])
        self.n[s] += self.n[r]
        self.e[s] += self.e[r]
        for t, w in list(self.row[r].items()):
            if t == r or t == s:
                raise InconsistentStateError("bipartite merge saw a same-side edge")
            m = self.row[s].get(t, 0) + w
            self.row[s][t] = m
            self.row[t][s] = m
            del self.row[t][r]
        self._untrack_block(r)
        del self.n[r], self.e[r], self.members[r], self.block_side[r], self.row[r]
        self.B -= 1

    # -- proposal sampling

    def sample_neighbor(self, v: int, rng: np.random.Generator) -> int:
        cumw = self.nbr_cumw[v]
        x = int(rng.integers(int(cumw[-1])))
        return int(self.nbr_nodes[v][int(np.searchsorted(cumw, x, side="right"))])

    def sample_merge_partner(self, r: int, rng: np.random.Generator, p_uniform: float) -> int | None:
        side_list = self.side_lists[self.block_side[r]]
        if len(side_list) < 2:
            return None
        if rng.random() < p_uniform:
            j = int(rng.integers(len(side_list)))
            t = side_list[j]
            if t == r:
                t = side_list[(j + 1) % len(side_list)]
            return t
        members = sorted(self.members[r])
        v = members[int(rng.integers(len(members)))]
        u = self.sample_neighbor(v, rng)
        v2 = self.sample_neighbor(u, rng)
        t = self.b[v2]
        return None if t == r else t


# ---------------------------------------------------------------------------
# Inference driver


def _agglomerate(
    level: _LevelState,
    rng: np.random.Generator,
    passes: int,
    frozen: float,
    best: dict,
    trace: list[float],
    n_candidates: int = 4,
    p_uniform: float = 0.2,
) -> float:
    """Greedy sigma-guided merges from the current partition; returns the running objective."""
    running = level.local_objective()
    for _ in range(passes):
        candidates: list[tuple[float, int, int]] = []
        for side in (0, 1):
            for r in sorted(level.side_lists[side]):
                partners = set()
                for _ in range(n_candidates):
                    t = level.sample_merge_partner(r, rng, p_uniform)
                    if t is not None:
                        partners.add(t)
                for t in sorted(partners):
                    candidates.append((level.delta_merge_core(r, t), min(r, t), max(r, t)))
        # Rank by estimated gain; ties resolve to the lowest block-id pair.
        candidates.sort()
        touched: set[int] = set()
        applied = 0
        for _, a, c in candidates:
            if a in touched or c in touched or level.B <= 2:
                continue
            delta = level.delta_merge_core(a, c) + level.b_shrink_term()
            if delta >= 0:
                continue
            level.apply_merge(a, c)
            running += delta
            touched.update((a, c))
            applied += 1
            if frozen + running < best["sigma"] - 1e-10:
                best["sigma"] = frozen + running
                best["assignment"] = level.assignment()
        trace.append(best["sigma"])
        if applied == 0:
            break
    return level.local_objective()


def _sweep(
    level: _LevelState,
    rng: np.random.Generator,
    sweeps: int,
    frozen: float,
    best: dict,
    trace: list[float],
) -> None:
    """Metropolis-Hastings node-move sweeps at inverse temperature 1."""
    running = level.local_objective()
    for _ in range(sweeps):
        for v in rng.permutation(level.M):
            v = int(v)
            side_list = level.side_lists[level.sides[v]]
            j = int(rng.integers(len(side_list)))
            target = side_list[j]
            if target == level.b[v]:
                target = level.next_id  # propose a fresh block instead of a null move
            delta, count_before, count_after = level.delta_move(v, target)
            log_accept = -delta + math.log(count_before / count_after)
            if log_accept < 0 and rng.random() >= math.exp(log_accept):
                continue
            level.apply_move(v, target)
            running += delta
            if frozen + running < best["sigma"] - 1e-10:
                best["sigma"] = frozen + running
                best["assignment"] = level.assignment()
        trace.append(best["sigma"])


def _canonical_relabel(assignment: list[int]) -> tuple[np.ndarray, int]:
    """Dense block labels ordered by each block's smallest member."""
    first_seen: dict[int, int] = {}
    for v, r in enumerate(assignment):
        first_seen.setdefault(r, v)
    order = sorted(first_seen, key=lambda r: first_seen[r])
    mapping = {r: i for i, r in enumerate(order)}
    return np.array([mapping[r] for r in assignment], dtype=np.int64), len(order)


def _aggregate(
    sides: list[int],
    strengths: list[int],
    edge_list: list[tuple[int, int, int]],
    dense: np.ndarray,
    b_count: int,
) -> tuple[list[int], list[int], list[tuple[int, int, int]]]:
    """Block-level sides, strengths, and multigraph for the next level up."""
    up_sides = [-1] * b_count
    up_strengths = [0] * b_count
    for item, r in enumerate(dense):
        up_sides[int(r)] = sides[item]
        up_strengths[int(r)] += strengths[item]
    acc: dict[tuple[int, int], int] = {}
    for u, v, w in edge_list:
        r, s = int(dense[u]), int(dense[v])
        key = (r, s) if r < s else (s, r)
        acc[key] = acc.get(key, 0) + w
    up_edges = [(r, s, w) for (r, s), w in sorted(acc.items())]
    return up_sides, up_strengths, up_edges


def infer(
    graph: BipartiteGraph,
    seed: int = 1,
    sweeps: int = DEFAULT_SWEEPS,
    init_passes: int = DEFAULT_INIT_PASSES,
    max_levels: int = 10,
    refine_rounds: int = DEFAULT_REFINE_ROUNDS,
) -> BlockState:
    """Minimize sigma over nested bipartite partitions.

    Each level is fit in turn: greedy agglomerative merges from singletons,
    then `sweeps` Metropolis-Hastings node-move sweeps, keeping the best
    partition observed. Merge and sweep phases alternate from the running
    best for up to `refine_rounds` rounds while sigma keeps improving. A new
    level on top is kept only while it lowers the full description length.
    Deterministic given (graph, seed, sweeps, refine_rounds).
    """
    if graph.total_edges == 0:
        raise EmptyGraphError("graph has no edges")
    if sweeps < 0 or init_passes < 0:
        raise ValueError("sweeps and init_passes must be non-negative")
    if refine_rounds < 1:
        raise ValueError("refine_rounds must be at least 1")
    rng = np.random.default_rng(seed)

    sides = [graph.side(i) for i in range(graph.n_nodes)]
    strengths = [int(k) for k in graph.degrees]
    edge_list = [(u, v, w) for (u, v), w in sorted(graph.edges.items())]

    levels: list[np.ndarray] = []
    trace: list[float] = []
    frozen = graph.dl_constant  # sigma terms the active level cannot change
    sigma_now = math.inf

    for depth in range(max_levels):
        level = _LevelState(sides, strengths, edge_list, graph.total_edges, dc=(depth == 0))
        best = {"sigma": frozen + level.local_objective(), "assignment": level.assignment()}
        if trace:
            best["sigma"] = min(best["sigma"], trace[-1])
            # Starting a new level from singletons never beats the state so
            # far; the running best protects the trace's monotonicity.
            best["assignment"] = level.assignment()
        previous = math.inf
        for _ in range(refine_rounds):
            _agglomerate(level, rng, init_passes, frozen, best, trace)
            _sweep(level, rng, sweeps, frozen, best, trace)
            if best["sigma"] >= previous - 1e-9:
                break
            previous = best["sigma"]
            # The next round merges and refines from the best state seen.
            level.set_assignment(best["assignment"])

        dense, b_count = _canonical_relabel(best["assignment"])
        candidate = levels + [dense]
        sigma_candidate, _, _ = _sigma_terms(graph, candidate)
        if depth > 0 and (sigma_candidate >= sigma_now - 1e-9 or b_count >= len(sides)):
            break
        levels = candidate
        sigma_now = sigma_candidate
        # Everything below the next level is frozen; only the top edge-matrix
        # term gets replaced when another level lands on top.
        frozen = sigma_now - _ln_multiset(b_count * (b_count + 1) // 2, graph.total_edges)
        sides, strengths, edge_list = _aggregate(sides, strengths, edge_list, dense, b_count)
        if b_count <= 2:
            break

    sigma, counts, edge_counts = _sigma_terms(graph, levels)
    best_traced = min(trace) if trace else sigma
    if sigma > best_traced + 1e-6:
        raise InconsistentStateError(
            f"final sigma {sigma} disagrees with best traced {best_traced}"
        )
    state = BlockState(
        levels=levels,
        block_counts=counts,
        level_edge_counts=edge_counts,
        sigma=sigma,
        sigma_trace=trace,
    )
    return state


# ---------------------------------------------------------------------------
# Topic extraction


@dataclass
class TopicModel:
    """Word-block topics at one hierarchy level, with both conditional densities."""

    level: int
    n_topics: int
    p_word_given_topic: np.ndarray
    p_topic_given_document: np.ndarray
    word_topics: np.ndarray
    doc_segment_indices: tuple[int, ...]
    doc_lengths: np.ndarray


def _composed_assignment(state: BlockState, level: int) -> np.ndarray:
    if not 0 <= level < len(state.levels):
        raise ValueError(f"level {level} out of range 0..{len(state.levels) - 1}")
    assignment = state.levels[0]
    for l in range(1, level + 1):
        assignment = state.levels[l][assignment]
    return assignment


def extract_topics(graph: BipartiteGraph, state: BlockState, level: int = 0) -> TopicModel:
    """Topics are the word-side blocks at the requested level.

    p(word | topic) spreads each topic's token mass over its words;
    p(topic | document) is the share of a document's tokens landing in each
    topic. Both are exact block-count ratios, so rows sum to 1.
    """
    assignment = _composed_assignment(state, level)
    word_nodes = np.arange(graph.n_docs, graph.n_nodes)
    word_blocks = assignment[word_nodes]
    topic_ids = sorted(set(int(r) for r in word_blocks))
    topic_index = {r: t for t, r in enumerate(topic_ids)}
    n_topics = len(topic_ids)

    v = graph.n_words
    d = graph.n_docs
    word_topics = np.array([topic_index[int(r)] for r in word_blocks], dtype=np.int64)
    word_degrees = graph.degrees[graph.n_docs:]

    topic_mass = np.zeros(n_topics, dtype=np.int64)
    np.add.at(topic_mass, word_topics, word_degrees)
    p_w_t = np.zeros((n_topics, v), dtype=np.float64)
    for w in range(v):
        t = word_topics[w]
        p_w_t[t, w] = word_degrees[w] / topic_mass[t]

    p_t_d = np.zeros((d, n_topics), dtype=np.float64)
    for (u, wnode), weight in graph.edges.items():
        p_t_d[u, word_topics[wnode - d]] += weight
    p_t_d /= graph.degrees[:d, None]

    return TopicModel(
        level=level,
        n_topics=n_topics,
        p_word_given_topic=p_w_t,
        p_topic_given_document=p_t_d,
        word_topics=word_topics,
        doc_segment_indices=graph.doc_segment_indices,
        doc_lengths=graph.degrees[:d].copy(),
    )


def choose_level(
    state: BlockState,
    graph: BipartiteGraph,
    k_min: int = TOPIC_COUNT_MIN,
    k_max: int = TOPIC_COUNT_MAX,
) -> int:
    """Finest level whose topic count lies in [k_min, k_max].

    When no level qualifies, fall back to the level whose count is closest
    to the band (finest wins ties).
    """
    word_counts = []
    for level in range(len(state.levels)):
        assignment = _composed_assignment(state, level)
        word_counts.append(len(set(int(r) for r in assignment[graph.n_docs:])))
    for level, k in enumerate(word_counts):
        if k_min <= k <= k_max:
            return level
    def distance(k: int) -> int:
        if k < k_min:
            return k_min - k
        return k - k_max
    return min(range(len(word_counts)), key=lambda level: (distance(word_counts[level]), level))
