"""Fast existence checks for weak copies of a dense pattern in sparse samples.

The production trick: every edge of a copy of B inherits the codegree of
the corresponding B-edge, so edges of G whose endpoints share fewer than
min-codegree(B) common neighbors can never carry a copy.  Filtering them
out first reduces a huge sparse host to a handful of candidate edges; the
exact backtracking search then runs on the residue.  Pure-Python and
numba variants share the same semantics.
"""
from __future__ import annotations

import numpy as np

from .core import HOM, FiniteStructure, enumerate_embeddings

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def _codegree_mask(indptr, indices, eu, ev, kappa):  # pragma: no cover - numba
    m = eu.shape[0]
    out = np.zeros(m, dtype=np.bool_)
    for t in range(m):
        iu, endu = indptr[eu[t]], indptr[eu[t] + 1]
        iv, endv = indptr[ev[t]], indptr[ev[t] + 1]
        cnt = 0
        while iu < endu and iv < endv:
            a = indices[iu]
            b = indices[iv]
            if a == b:
                cnt += 1
                if cnt >= kappa:
                    out[t] = True
                    break
                iu += 1
                iv += 1
            elif a < b:
                iu += 1
            else:
                iv += 1
    return out


def _csr_adjacency(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    both = np.concatenate([edges, edges[:, ::-1]], axis=0)
    order = np.argsort(both[:, 0] * n + both[:, 1])  # single-key sort beats lexsort
    both = both[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, both[:, 0] + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, np.ascontiguousarray(both[:, 1])


def _pattern_min_codegree(B: FiniteStructure, rel_idx: int) -> int:
    """min over B-edges of the number of common neighbors inside B."""
    adj: list[set] = [set() for _ in range(B.n)]
    for u, v in B.arrays[rel_idx].tolist():
        adj[u].add(v)
        adj[v].add(u)
    kappa = None
    for u, v in B.arrays[rel_idx].tolist():
        c = len(adj[u] & adj[v])
        kappa = c if kappa is None else min(kappa, c)
    return 0 if kappa is None else kappa


def has_weak_copy(B: FiniteStructure, G: FiniteStructure) -> bool:
    """True iff B maps into G injectively with all B-edges present.

    Equivalent to a homomorphism-relative-to-the-empty-base embedding.
    Uses the codegree filter when the signature is one binary relation
    and the filter can bite; otherwise plain backtracking.
    """
    if B.sig != G.sig:
        raise ValueError("pattern and host use different signatures")
    if B.n > G.n:
        return False
    fast = (
        G.n > 64
        and G.sig.p == 1
        and G.sig.relations[0].arity == 2
        and B.w(0) > 0
        # every pattern vertex must sit on an edge, else a copy could place
        # it outside the filtered host and the reduction would be unsound
        and len(np.unique(B.arrays[0])) == B.n
    )
    if fast:
        kappa = _pattern_min_codegree(B, 0)
        if kappa >= 1:
            edges = G.arrays[0]
            if edges.shape[0] < B.w(0):
                return False
            indptr, indices = _csr_adjacency(G.n, edges)
            mask = np.asarray(
                _codegree_mask(indptr, indices,
                               np.ascontiguousarray(edges[:, 0]),
                               np.ascontiguousarray(edges[:, 1]),
                               kappa)
            )
            kept = edges[mask]
            if kept.shape[0] < B.w(0):
                return False
            verts = np.unique(kept)
            if verts.shape[0] < B.n:
                return False
            relabel = {int(v): i for i, v in enumerate(verts)}
            host = FiniteStructure(
                G.sig, len(verts),
                [[[relabel[int(u)], relabel[int(v)]] for u, v in kept.tolist()]],
            )
            G = host
    for _ in enumerate_embeddings(B, G, mode=HOM, base=frozenset()):
        return True
    return False
