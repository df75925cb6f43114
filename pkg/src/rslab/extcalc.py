"""Strong/intrinsic/primitive extension tests, closures, copy counting.

All three extension tests enumerate the 2^v intermediate vertex sets of a
pattern; they are exact and meant for small v (the CLI refuses v > 16).
Closure search supports three interchangeable strategies so the pruned
production path can be checked against a brute-force oracle.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Mapping

from .core import (
    ISO,
    FiniteStructure,
    InputError,
    enumerate_embeddings,
    parse_structure,
)
from .dimension import (
    NEGATIVE,
    POSITIVE,
    DimForm,
    delta,
    delta_of_subset,
    e_rel,
    gamma_prod,
)

MAX_PATTERN_V = 20  # hard library guard; the CLI refuses v > 16 already


@dataclass(frozen=True)
class ExtensionPattern:
    """A pair base <= whole with the base designated inside the whole."""

    whole: FiniteStructure
    base: frozenset

    def __post_init__(self):
        for v in self.base:
            if not (0 <= v < self.whole.n):
                raise InputError(f"base vertex {v} outside universe of size {self.whole.n}")

    @cached_property
    def v(self) -> int:
        return self.whole.n - len(self.base)

    @cached_property
    def delta_rel(self) -> DimForm:
        return delta(self.whole) - delta_of_subset(self.whole, self.base)

    @cached_property
    def e_rel(self) -> DimForm:
        return e_rel(self.whole, self.base)

    @cached_property
    def gamma_prod(self) -> float:
        return gamma_prod(self.whole, self.base)

    def to_json_dict(self) -> dict:
        return {"structure": self.whole.to_json_dict(), "base": sorted(self.base)}

    @classmethod
    def from_json_dict(cls, data: Mapping, sig) -> "ExtensionPattern":
        whole = parse_structure(json.dumps(data["structure"]), sig)
        return cls(whole=whole, base=frozenset(data["base"]))


def _guard_v(v: int):
    if v > MAX_PATTERN_V:
        raise ValueError(f"extension has {v} new vertices; exact 2^v test refused above {MAX_PATTERN_V}")


def strong_in(M: FiniteStructure, A: Iterable[int], B: Iterable[int]) -> bool:
    """A <=s B inside M: delta(B1/A) > 0 for every A < B1 <= B."""
    aset, bset = set(A), set(B)
    new = sorted(bset - aset)
    _guard_v(len(new))
    dA = delta_of_subset(M, aset)
    for size in range(1, len(new) + 1):
        for extra in combinations(new, size):
            if (delta_of_subset(M, aset | set(extra)) - dA).sign() != POSITIVE:
                return False
    return True


def intrinsic_in(M: FiniteStructure, A: Iterable[int], B: Iterable[int]) -> bool:
    """A <=i B inside M: A == B, or delta(B/B1) < 0 for every A <= B1 < B."""
    aset, bset = set(A), set(B)
    new = sorted(bset - aset)
    if not new:
        return True
    _guard_v(len(new))
    dB = delta_of_subset(M, bset)
    for size in range(0, len(new)):
        for extra in combinations(new, size):
            if (dB - delta_of_subset(M, aset | set(extra))).sign() != NEGATIVE:
                return False
    return True


def primitive_in(M: FiniteStructure, A: Iterable[int], B: Iterable[int]) -> bool:
    """delta(B/A) > 0 while delta(B/A1) <= 0 for every strictly larger base."""
    aset, bset = set(A), set(B)
    new = sorted(bset - aset)
    _guard_v(len(new))
    dB = delta_of_subset(M, bset)
    if (dB - delta_of_subset(M, aset)).sign() != POSITIVE:
        return False
    for size in range(1, len(new) + 1):
        for extra in combinations(new, size):
            if (dB - delta_of_subset(M, aset | set(extra))).sign() == POSITIVE:
                return False
    return True


def is_strong(pat: ExtensionPattern) -> bool:
    return strong_in(pat.whole, pat.base, range(pat.whole.n))


def is_intrinsic(pat: ExtensionPattern) -> bool:
    return intrinsic_in(pat.whole, pat.base, range(pat.whole.n))


def is_primitive(pat: ExtensionPattern) -> bool:
    return primitive_in(pat.whole, pat.base, range(pat.whole.n))


# -- hereditary nonnegativity ------------------------------------------


def _wdeg_form(M: FiniteStructure, counts) -> DimForm:
    return DimForm(1, tuple(-c for c in counts), M.sig)


def core_rel(M: FiniteStructure, A: frozenset) -> set:
    """Vertices outside A that survive weighted-degree peeling relative to A.

    A vertex x is peeled while its hyperedges inside (A + survivors) carry
    weight <= 1; any minimal negative-delta set, and any vertex set X with
    A <=i (A + X), lives entirely inside the returned set.
    """
    alive = set(range(M.n)) - A
    if not alive:
        return alive
    counts = [[0] * M.sig.p for _ in range(M.n)]
    live_edges: list[tuple[int, tuple[int, ...]]] = []
    for i, edges in enumerate(M.edge_sets):
        for e in edges:
            live_edges.append((i, e))
    edge_alive = [True] * len(live_edges)
    inc: list[list[int]] = [[] for _ in range(M.n)]
    for idx, (i, e) in enumerate(live_edges):
        for v in e:
            inc[v].append(idx)
        for v in e:
            counts[v][i] += 1

    def peelable(x: int) -> bool:
        return _wdeg_form(M, counts[x]).sign() != NEGATIVE

    stack = [x for x in alive if peelable(x)]
    while stack:
        x = stack.pop()
        if x not in alive or not peelable(x):
            continue
        alive.discard(x)
        for idx in inc[x]:
            if not edge_alive[idx]:
                continue
            edge_alive[idx] = False
            i, e = live_edges[idx]
            for u in e:
                if u == x:
                    continue
                counts[u][i] -= 1
                if u in alive and peelable(u):
                    stack.append(u)
    return alive


def in_K0_plus(M: FiniteStructure, size_cap: int | None = None) -> bool:
    """True iff no vertex subset (of size <= size_cap, if given) has delta < 0.

    A minimum-cardinality violating set has weighted degree > 1 at every
    vertex, hence survives peeling; only subsets of the peeled core are
    enumerated.
    """
    core = sorted(core_rel(M, frozenset()))
    if not core:
        return True
    limit = len(core) if size_cap is None else min(size_cap, len(core))
    total = sum(comb(len(core), s) for s in range(1, limit + 1))
    if total > 2_000_000:
        raise ValueError(
            f"hereditary check needs {total} subsets of a {len(core)}-vertex core; "
            "pass a size_cap or use a sparser structure"
        )
    for size in range(1, limit + 1):
        for S in combinations(core, size):
            if delta_of_subset(M, S).sign() == NEGATIVE:
                return False
    return True


# -- closure -----------------------------------------------------------


def _max_edge_weight_form(M: FiniteStructure, total_vertices: int, base_size: int) -> DimForm:
    # upper bound (in the form order) on delta(B/A) for |B-A| = s: s minus the
    # largest possible weight of edges not inside A
    s = total_vertices
    coeffs = []
    for rel in M.sig.relations:
        k = rel.arity
        coeffs.append(-(comb(base_size + s, k) - comb(base_size, k)))
    return DimForm(s, tuple(coeffs), M.sig)


def _max_wdeg_form(M: FiniteStructure, pool_size: int) -> DimForm:
    # largest possible weighted degree of one vertex among pool_size others
    coeffs = [-comb(pool_size, rel.arity - 1) if rel.arity - 1 <= pool_size else 0
              for rel in M.sig.relations]
    return DimForm(1, tuple(coeffs), M.sig)


def _candidate_prune(M: FiniteStructure, aset: set, X: tuple) -> bool:
    """False when some x in X cannot satisfy delta(B/B-x) < 0, so B = A+X
    is certainly not intrinsic over A."""
    bset = aset | set(X)
    for x in X:
        counts = [0] * M.sig.p
        for i, e in M.incidence[x]:
            if all(u in bset for u in e):
                counts[i] += 1
        if _wdeg_form(M, counts).sign() != NEGATIVE:
            return False
    return True


def _closure_subset_scan(M, aset: set, m: int, pruned: bool) -> set:
    out = set(aset)
    others = sorted(set(range(M.n)) - aset)
    for size in range(1, m):
        for X in combinations(others, size):
            if pruned and not _candidate_prune(M, aset, X):
                continue
            if intrinsic_in(M, aset, aset | set(X)):
                out.update(X)
    return out


def _co_adjacency(M: FiniteStructure, pool: set) -> dict:
    adj: dict[int, set] = {v: set() for v in pool}
    for v in pool:
        for _, e in M.incidence[v]:
            for u in e:
                if u != v and u in pool:
                    adj[v].add(u)
    return adj


def _connected_subsets(pool: set, adj: dict, max_size: int):
    """Every connected subset of pool (sizes 1..max_size), each exactly once.

    ESU-style: sets are anchored at their minimum vertex and grown through
    exclusive neighborhoods, so no set is produced twice.
    """

    def extend(sub: set, ext: list, v: int):
        yield frozenset(sub)
        if len(sub) == max_size:
            return
        closed = set(sub)
        for u in sub:
            closed.update(adj[u])
        ext = list(ext)
        while ext:
            w = ext.pop(0)
            new_ext = ext + [u for u in sorted(adj[w]) if u > v and u not in closed]
            yield from extend(sub | {w}, new_ext, v)

    for v in sorted(pool):
        seeds = sorted(u for u in adj[v] if u > v)
        yield from extend({v}, seeds, v)


def _closure_components(M: FiniteStructure, aset: set, m: int) -> set:
    """Closure via single-component candidates inside the relative core.

    Any B with A <=i B splits, over shared hyperedges, into components
    that are each intrinsic over A on their own, so scanning connected
    candidate sets loses nothing.
    """
    out = set(aset)
    budget = m - 1
    # sizes that cannot host an intrinsic component, whatever the edges do
    viable_sizes = [
        s for s in range(1, budget + 1)
        if _max_edge_weight_form(M, s, len(aset)).sign() == NEGATIVE
        and _max_wdeg_form(M, len(aset) + s - 1).sign() == NEGATIVE
    ]
    if not viable_sizes:
        return out
    if viable_sizes == [1]:
        # single-vertex extensions: every contributing edge is x plus base vertices
        cand = set()
        for a in aset:
            for _, e in M.incidence[a]:
                extra = [u for u in e if u not in aset]
                if len(extra) == 1:
                    cand.add(extra[0])
        for rel_idx, rel in enumerate(M.sig.relations):
            if rel.arity == 1:
                cand.update(v for (v,) in M.edge_sets[rel_idx] if v not in aset)
        for x in sorted(cand):
            if _candidate_prune(M, aset, (x,)):
                out.add(x)
        return out
    pool = core_rel(M, frozenset(aset))
    if not pool:
        return out
    adj = _co_adjacency(M, pool)
    max_size = max(viable_sizes)
    for X in _connected_subsets(pool, adj, max_size):
        if len(X) not in viable_sizes:
            continue
        if not _candidate_prune(M, aset, tuple(X)):
            continue
        if intrinsic_in(M, aset, aset | X):
            out.update(X)
    return out


def closure(M: FiniteStructure, A: Iterable[int], m: int, method: str = "auto") -> set:
    """cl^m_M(A): union of all B with A <=i B and |B - A| < m.

    method: "pruned" (subset scan with the per-vertex degree prune),
    "exhaustive" (unpruned oracle), "components" (connected-candidate
    search inside the weighted core; scales to large hosts), or "auto".
    """
    aset = set(A)
    for v in aset:
        if not (0 <= v < M.n):
            raise ValueError(f"vertex {v} outside universe of size {M.n}")
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m <= 1:
        return set(aset)
    if method == "auto":
        method = "pruned" if M.n <= 24 else "components"
    if method == "exhaustive":
        return _closure_subset_scan(M, aset, m, pruned=False)
    if method == "pruned":
        return _closure_subset_scan(M, aset, m, pruned=True)
    if method == "components":
        return _closure_components(M, aset, m)
    raise ValueError(f"unknown closure method {method!r}")


def has_negative_subset(M: FiniteStructure, max_size: int, method: str = "auto") -> bool:
    """True iff some nonempty S with |S| <= max_size has delta(S) < 0.

    A minimum violator is connected over shared hyperedges and survives
    weighted-degree peeling, so the fast path only scans connected core
    subsets; "naive" scans every subset.
    """
    if method == "auto":
        method = "naive" if M.n <= 16 else "core"
    if method == "naive":
        for size in range(1, min(max_size, M.n) + 1):
            for S in combinations(range(M.n), size):
                if delta_of_subset(M, S).sign() == NEGATIVE:
                    return True
        return False
    viable = [s for s in range(1, max_size + 1)
              if _max_edge_weight_form(M, s, 0).sign() == NEGATIVE]
    if not viable:
        return False
    core = core_rel(M, frozenset())
    if not core:
        return False
    adj = _co_adjacency(M, core)
    for S in _connected_subsets(core, adj, max(viable)):
        if delta_of_subset(M, S).sign() == NEGATIVE:
            return True
    return False


# -- copies ------------------------------------------------------------


def _validate_base_embedding(M: FiniteStructure, pat: ExtensionPattern, f: Mapping[int, int]):
    if set(f) != set(pat.base):
        raise ValueError("f must be defined exactly on the pattern base")
    if len(set(f.values())) != len(f):
        raise ValueError("f must be injective")
    for i in range(M.sig.p):
        for e in pat.whole.edge_sets[i]:
            if all(v in pat.base for v in e):
                img = tuple(sorted(f[v] for v in e))
                if img not in M.edge_sets[i]:
                    raise ValueError(f"f is not an iso-mode embedding: missing image of {e}")
    img_set = set(f.values())
    inv = {u: v for v, u in f.items()}
    for u in img_set:
        for i, e in M.incidence[u]:
            if all(w in img_set for w in e):
                pre = tuple(sorted(inv[w] for w in e))
                if pre not in pat.whole.edge_sets[i]:
                    raise ValueError(f"f is not an iso-mode embedding: extra relation at {e}")


def copies_over(M: FiniteStructure, pat: ExtensionPattern, f: Mapping[int, int]) -> list[frozenset]:
    """Distinct images of extensions of f to iso-mode embeddings of the whole."""
    _validate_base_embedding(M, pat, f)
    images = set()
    for emb in enumerate_embeddings(pat.whole, M, partial=dict(f), mode=ISO):
        images.add(emb.image_set())
    return sorted(images, key=sorted)


def chi(M: FiniteStructure, pat: ExtensionPattern, f: Mapping[int, int]) -> int:
    """Number of distinct copies of the whole over the base image."""
    return len(copies_over(M, pat, f))


def max_disjoint_family(parts: list[frozenset]) -> int:
    """Largest pairwise-disjoint subfamily, by branch and bound."""
    parts = sorted(parts, key=sorted)
    best = 0

    def rec(i: int, used: frozenset, count: int):
        nonlocal best
        if count > best:
            best = count
        if i == len(parts) or count + (len(parts) - i) <= best:
            return
        if used.isdisjoint(parts[i]):
            rec(i + 1, used | parts[i], count + 1)
        rec(i + 1, used, count)

    rec(0, frozenset(), 0)
    return best


def chi_star(M: FiniteStructure, pat: ExtensionPattern, f: Mapping[int, int]) -> int:
    """Size of a maximum family of copies pairwise disjoint outside f(base)."""
    base_img = frozenset(f.values())
    parts = [img - base_img for img in copies_over(M, pat, f)]
    return max_disjoint_family(parts)


# -- chains and the dichotomy ------------------------------------------


def intrinsic_chain(pat: ExtensionPattern) -> list[frozenset]:
    """A chain base = A0 < ... < An = whole of consecutive minimal pairs.

    Each step takes the first (smallest, then lexicographic) Z with
    A_i <=i Z; minimal cardinality makes (A_i, Z) a minimal pair.  Chains
    are not unique; this returns the greedy first one.
    """
    M = pat.whole
    full = frozenset(range(M.n))
    if not is_intrinsic(pat):
        raise ValueError("not intrinsic")
    chain = [frozenset(pat.base)]
    cur = set(pat.base)
    while cur != set(full):
        rest = sorted(full - cur)
        step = None
        for size in range(1, len(rest) + 1):
            for extra in combinations(rest, size):
                if intrinsic_in(M, cur, cur | set(extra)):
                    step = set(extra)
                    break
            if step is not None:
                break
        assert step is not None  # cur <=i full guarantees a candidate (full itself)
        cur |= step
        chain.append(frozenset(cur))
    return chain


def minimal_strong_superset(M: FiniteStructure, A: Iterable[int]) -> frozenset:
    """Smallest B with A <= B <=s M; realizes the intrinsic/strong dichotomy.

    The returned B satisfies A <=i B and B <=s M.
    """
    aset = set(A)
    others = sorted(set(range(M.n)) - aset)
    full = range(M.n)
    for size in range(0, len(others) + 1):
        for extra in combinations(others, size):
            cand = aset | set(extra)
            if strong_in(M, cand, full):
                return frozenset(cand)
    raise AssertionError("unreachable: the full universe is strong in itself")
