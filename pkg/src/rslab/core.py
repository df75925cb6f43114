"""Finite symmetric irreflexive relational structures, embeddings, serialization.

Hyperedges are vertex *sets*: every edge is stored as a sorted tuple of
distinct vertices, per relation, with the rows in lexicographic order.
Symmetry and irreflexivity are therefore structural and never re-checked
at query time.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

ISO = "iso"  # isomorphism onto image: edge in source iff image edge in target
HOM = "hom"  # homomorphism relative to a base: forward-only, base edges unconstrained


class InputError(ValueError):
    """Malformed external input (files, CLI arguments)."""


def _as_fraction(value) -> Fraction:
    """Read a weight given as decimal string, {"num","den"} pair, int or float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, dict):
        return Fraction(value["num"], value["den"])
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # decimal digits as written, not the binary expansion
        return Fraction(str(value))
    raise InputError(f"cannot interpret weight {value!r}")


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    alpha: Fraction
    gamma: Fraction = Fraction(1)

    def __post_init__(self):
        if self.arity < 1:
            raise InputError(f"relation {self.name}: arity must be >= 1")
        if not (0 < self.alpha <= 1):
            raise InputError(f"relation {self.name}: alpha must lie in (0,1]")
        if not (0 <= self.gamma <= 1):
            raise InputError(f"relation {self.name}: gamma must lie in [0,1]")


@dataclass(frozen=True)
class Signature:
    """Ordered relation symbols with their arities and weights.

    ``independence`` asserts that {1, alpha_0, ..., alpha_{p-1}} are
    linearly independent over the rationals; dimension-form zero tests
    are purely symbolic exactly when it is set.
    """

    relations: tuple[Relation, ...]
    independence: bool = True

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise InputError("relation names must be unique")

    @property
    def p(self) -> int:
        return len(self.relations)

    @property
    def alphas(self) -> tuple[Fraction, ...]:
        return tuple(r.alpha for r in self.relations)

    @property
    def max_arity(self) -> int:
        return max((r.arity for r in self.relations), default=0)

    def index(self, name: str) -> int:
        for i, r in enumerate(self.relations):
            if r.name == name:
                return i
        raise InputError(f"unknown relation {name!r}")

    def to_json_dict(self) -> dict:
        return {
            "independence_mode": self.independence,
            "relations": [
                {
                    "name": r.name,
                    "arity": r.arity,
                    "alpha": {"num": r.alpha.numerator, "den": r.alpha.denominator},
                    "gamma": {"num": r.gamma.numerator, "den": r.gamma.denominator},
                }
                for r in self.relations
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Signature":
        try:
            rels = tuple(
                Relation(
                    name=str(r["name"]),
                    arity=int(r["arity"]),
                    alpha=_as_fraction(r["alpha"]),
                    gamma=_as_fraction(r.get("gamma", 1)),
                )
                for r in data["relations"]
            )
            return cls(relations=rels, independence=bool(data.get("independence_mode", True)))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed signature: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> "Signature":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def binary_signature(alpha, gamma=1, name: str = "R", independence: bool = True) -> Signature:
    """One symmetric binary relation; the workhorse test signature."""
    return Signature(
        relations=(Relation(name, 2, _as_fraction(alpha), _as_fraction(gamma)),),
        independence=independence,
    )


class FiniteStructure:
    """A finite structure over a Signature; immutable after construction.

    Edges live in one canonical int64 array per relation (rows ascending
    within an edge, rows lex-sorted, no duplicates).  Python-level views
    (edge sets, incidence lists) are built lazily and cached, so sampling
    large structures does not pay for per-edge Python objects.
    """

    __slots__ = ("sig", "n", "arrays", "_edge_sets", "_incidence", "_degrees", "_edge_masks")

    def __init__(self, sig: Signature, n: int, edges, _canonical: bool = False):
        if n < 0:
            raise InputError("universe size must be nonnegative")
        self.sig = sig
        self.n = n
        if _canonical:
            self.arrays = tuple(edges)
        else:
            self.arrays = tuple(
                self._canonicalize(i, rel, edges[i] if i < len(edges) else ())
                for i, rel in enumerate(sig.relations)
            )
        self._edge_sets = None
        self._incidence = None
        self._degrees = None
        self._edge_masks = None

    def _canonicalize(self, i: int, rel: Relation, rows) -> np.ndarray:
        arr = np.asarray(list(rows) if not isinstance(rows, np.ndarray) else rows, dtype=np.int64)
        if arr.size == 0:
            return np.empty((0, rel.arity), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != rel.arity:
            raise InputError(f"relation {rel.name}: arity mismatch in edge list")
        if arr.min() < 0 or arr.max() >= self.n:
            bad = arr[(arr < 0).any(axis=1) | (arr >= self.n).any(axis=1)][0]
            raise InputError(f"relation {rel.name}: vertex out of range in hyperedge {bad.tolist()}")
        arr = np.sort(arr, axis=1)
        if rel.arity > 1 and not (np.diff(arr, axis=1) > 0).all():
            bad = arr[(np.diff(arr, axis=1) <= 0).any(axis=1)][0]
            raise InputError(
                f"relation {rel.name}: irreflexivity violated in hyperedge {bad.tolist()}"
            )
        return np.unique(arr, axis=0)

    # -- derived views -------------------------------------------------

    @property
    def edge_sets(self) -> tuple[frozenset, ...]:
        if self._edge_sets is None:
            self._edge_sets = tuple(
                frozenset(map(tuple, arr.tolist())) for arr in self.arrays
            )
        return self._edge_sets

    @property
    def incidence(self) -> list:
        """Per vertex: list of (relation index, edge tuple) containing it."""
        if self._incidence is None:
            inc = [[] for _ in range(self.n)]
            for i, arr in enumerate(self.arrays):
                for row in arr.tolist():
                    t = tuple(row)
                    for v in t:
                        inc[v].append((i, t))
            self._incidence = inc
        return self._incidence

    @property
    def degrees(self) -> list[int]:
        """Number of incident hyperedges per vertex, summed over relations."""
        if self._degrees is None:
            deg = [0] * self.n
            for arr in self.arrays:
                for v in arr.ravel().tolist():
                    deg[v] += 1
            self._degrees = deg
        return self._degrees

    @property
    def edge_masks(self) -> tuple[tuple[int, ...], ...]:
        """Per relation, each hyperedge as a vertex bitmask (hosts with n <= 63)."""
        if self._edge_masks is None:
            masks = []
            for arr in self.arrays:
                masks.append(tuple(
                    sum(1 << v for v in row) for row in arr.tolist()
                ))
            self._edge_masks = tuple(masks)
        return self._edge_masks

    def w(self, i: int) -> int:
        return int(self.arrays[i].shape[0])

    @property
    def edge_counts(self) -> tuple[int, ...]:
        return tuple(arr.shape[0] for arr in self.arrays)

    def has_edge(self, i: int, verts: Sequence[int]) -> bool:
        return tuple(sorted(verts)) in self.edge_sets[i]

    def edge_counts_within(self, S: Iterable[int]) -> tuple[int, ...]:
        """Per relation, the number of hyperedges lying entirely inside S."""
        sset = set(S)
        p = len(self.arrays)
        if not sset:
            return (0,) * p
        if self.n <= 63:
            smask = 0
            for v in sset:
                smask |= 1 << v
            return tuple(
                sum(1 for em in masks if em & smask == em) for masks in self.edge_masks
            )
        if len(sset) <= 32:
            seen: list[set] = [set() for _ in range(p)]
            for v in sset:
                for i, edge in self.incidence[v]:
                    if edge not in seen[i] and all(u in sset for u in edge):
                        seen[i].add(edge)
            return tuple(len(s) for s in seen)
        mask = np.zeros(self.n, dtype=bool)
        mask[list(sset)] = True
        return tuple(int(mask[arr].all(axis=1).sum()) if arr.size else 0 for arr in self.arrays)

    def edges_within(self, S: Iterable[int]) -> list[list[tuple[int, ...]]]:
        """Per relation, the hyperedges lying entirely inside S."""
        sset = set(S)
        out: list[list[tuple[int, ...]]] = [[] for _ in self.arrays]
        if not sset:
            return out
        if len(sset) <= 32:
            for i in range(len(self.arrays)):
                seen = set()
                for v in sset:
                    for j, edge in self.incidence[v]:
                        if j == i and edge not in seen and all(u in sset for u in edge):
                            seen.add(edge)
                out[i] = sorted(seen)
        else:
            mask = np.zeros(self.n, dtype=bool)
            mask[list(sset)] = True
            for i, arr in enumerate(self.arrays):
                if arr.size:
                    sub = arr[mask[arr].all(axis=1)]
                    out[i] = [tuple(r) for r in sub.tolist()]
        return out

    def induced(self, S: Iterable[int]) -> "FiniteStructure":
        """Induced substructure on S, relabeled 0..|S|-1 preserving vertex order."""
        verts = sorted(set(S))
        if verts and (verts[0] < 0 or verts[-1] >= self.n):
            raise InputError(f"vertex {verts[0] if verts[0] < 0 else verts[-1]} outside universe")
        relabel = {v: i for i, v in enumerate(verts)}
        edges = []
        for rows in self.edges_within(verts):
            edges.append([tuple(relabel[v] for v in row) for row in rows])
        return FiniteStructure(self.sig, len(verts), edges)

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": {
                rel.name: self.arrays[i].tolist()
                for i, rel in enumerate(self.sig.relations)
            },
        }

    def canonical_json(self) -> str:
        """Canonical text form: relations in signature order, rows lex-sorted."""
        return json.dumps(self.to_json_dict(), separators=(",", ":")) + "\n"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteStructure):
            return NotImplemented
        return (
            self.n == other.n
            and self.sig == other.sig
            and all(np.array_equal(a, b) for a, b in zip(self.arrays, other.arrays))
        )

    def __hash__(self):
        raise TypeError("FiniteStructure is not hashable; use canonical_json() as a key")

    def __repr__(self):
        counts = ",".join(f"{r.name}:{self.w(i)}" for i, r in enumerate(self.sig.relations))
        return f"FiniteStructure(n={self.n}, {counts})"


def parse_structure(text: str, sig: Signature) -> FiniteStructure:
    """Parse the JSON structure format {"n": int, "edges": {name: [[v,...],...]}}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed structure text: {exc}") from exc
    if not isinstance(data, dict) or "n" not in data:
        raise InputError("structure JSON must be an object with an 'n' field")
    n = data["n"]
    if not isinstance(n, int) or n < 0:
        raise InputError(f"bad universe size {n!r}")
    raw = data.get("edges", {})
    for name in raw:
        sig.index(name)  # raises on unknown relation
    edges = [raw.get(rel.name, []) for rel in sig.relations]
    return FiniteStructure(sig, n, edges)


def load_structure(path, sig: Signature) -> FiniteStructure:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_structure(fh.read(), sig)


@dataclass(frozen=True)
class Embedding:
    """Injective vertex map of source into target, in one of two modes.

    ISO: a hyperedge is present in the source iff its image is present in
    the target.  HOM: every source hyperedge with at least one vertex
    outside ``base`` has its image present; nothing is reflected and
    edges inside the base are unconstrained.
    """

    source: FiniteStructure
    target: FiniteStructure
    map: tuple[int, ...]
    mode: str = ISO
    base: frozenset = frozenset()

    def image_set(self) -> frozenset:
        return frozenset(self.map)

    def apply(self, v: int) -> int:
        return self.map[v]

    def compose(self, outer: "Embedding") -> "Embedding":
        """outer o self, valid when self.target is outer.source (ISO mode)."""
        return Embedding(
            source=self.source,
            target=outer.target,
            map=tuple(outer.map[u] for u in self.map),
            mode=self.mode,
            base=self.base,
        )


def _assignment_order(source: FiniteStructure, fixed: set) -> list[int]:
    # static order: fixed vertices first, then descending degree (classic pruning)
    deg = source.degrees
    rest = sorted((v for v in range(source.n) if v not in fixed), key=lambda v: (-deg[v], v))
    return sorted(fixed) + rest


def enumerate_embeddings(
    source: FiniteStructure,
    target: FiniteStructure,
    partial: Mapping[int, int] | None = None,
    mode: str = ISO,
    base: Iterable[int] | None = None,
) -> Iterator[Embedding]:
    """Yield every extension of ``partial`` to a full embedding, each once.

    Order is deterministic: backtracking follows a static source-vertex
    order (descending degree) with target candidates ascending, so the
    assignment vectors come out lexicographically in that order.
    An inconsistent partial yields an empty stream.
    """
    if mode not in (ISO, HOM):
        raise InputError(f"unknown embedding mode {mode!r}")
    base_set = frozenset(base) if base is not None else frozenset()
    if mode == HOM and base is None:
        raise InputError("HOM mode requires a base")
    partial = dict(partial) if partial else {}
    if len(set(partial.values())) != len(partial):
        return  # non-injective partial: nothing extends it
    for v, u in partial.items():
        if not (0 <= v < source.n and 0 <= u < target.n):
            return

    n_src = source.n
    src_sets = source.edge_sets
    tgt_sets = target.edge_sets
    order = _assignment_order(source, set(partial))
    pos = {v: i for i, v in enumerate(order)}

    # per source vertex, the edges it completes (all earlier vertices assigned)
    completes: list[list[tuple[int, tuple[int, ...], bool]]] = [[] for _ in range(n_src)]
    for i, edges in enumerate(src_sets):
        for edge in edges:
            last = max(edge, key=lambda v: pos[v])
            required = mode == ISO or not all(v in base_set for v in edge)
            completes[last].append((i, edge, required))

    assignment: dict[int, int] = {}
    used: set[int] = set()
    inv: dict[int, int] = {}

    def candidates_for(x: int):
        # narrow by the first completed required edge, else scan all targets
        chosen = None
        for i, edge, required in completes[x]:
            if required:
                chosen = (i, tuple(assignment[v] for v in edge if v != x))
                break
        if chosen is None:
            return range(target.n)
        i, others = chosen
        if not others:
            # unary relation: candidates carry the unary edge themselves
            return sorted(row[0] for row in tgt_sets[i])
        others_set = set(others)
        cands = set()
        for j, row in target.incidence[others[0]]:
            if j != i or len(row) != len(others) + 1:
                continue
            extra = set(row) - others_set
            if len(extra) == 1:
                cands.add(next(iter(extra)))
        return sorted(cands)

    def consistent(x: int, u: int) -> bool:
        # forward: completed source edges that must be present
        for i, edge, required in completes[x]:
            img = tuple(sorted(assignment[v] if v != x else u for v in edge))
            present = img in tgt_sets[i]
            if mode == ISO:
                if present != (edge in src_sets[i]):
                    return False
            elif required and not present:
                return False
        if mode == ISO:
            # reflection: target edges inside the image must pull back
            img_now = set(inv)
            for i, row in target.incidence[u]:
                if all(w == u or w in img_now for w in row):
                    pre = tuple(sorted(inv[w] if w != u else x for w in row))
                    if pre not in src_sets[i]:
                        return False
        return True

    def backtrack(k: int) -> Iterator[Embedding]:
        if k == n_src:
            yield Embedding(
                source=source,
                target=target,
                map=tuple(assignment[v] for v in range(n_src)),
                mode=mode,
                base=base_set,
            )
            return
        x = order[k]
        if x in partial:
            u = partial[x]
            if u not in used and consistent(x, u):
                assignment[x] = u
                used.add(u)
                inv[u] = x
                yield from backtrack(k + 1)
                del assignment[x]
                used.discard(u)
                del inv[u]
            return
        for u in candidates_for(x):
            if u in used or not consistent(x, u):
                continue
            assignment[x] = u
            used.add(u)
            inv[u] = x
            yield from backtrack(k + 1)
            del assignment[x]
            used.discard(u)
            del inv[u]

    yield from backtrack(0)


def count_embeddings(source, target, partial=None, mode=ISO, base=None) -> int:
    return sum(1 for _ in enumerate_embeddings(source, target, partial, mode, base))


def are_isomorphic(A: FiniteStructure, B: FiniteStructure) -> bool:
    """True iff an isomorphism exists (injective + ISO mode + equal sizes)."""
    if A.n != B.n or A.edge_counts != B.edge_counts:
        return False
    if sorted(A.degrees) != sorted(B.degrees):
        return False
    return next(iter(enumerate_embeddings(A, B, mode=ISO)), None) is not None


def canonical_key(M: FiniteStructure, fixed: Sequence[int] = ()) -> str:
    """Minimal serialization over relabelings; ``fixed`` vertices keep their ranks.

    Vertices listed in ``fixed`` are pinned to positions 0..len(fixed)-1 in
    the given order; the rest permute freely.  Brute force, for small M.
    """
    free = [v for v in range(M.n) if v not in set(fixed)]
    best = None
    for perm in permutations(range(len(fixed), M.n)):
        relabel = {v: i for i, v in enumerate(fixed)}
        relabel.update({v: p for v, p in zip(free, perm)})
        rows = []
        for i, edges in enumerate(M.edge_sets):
            rows.append(sorted(tuple(sorted(relabel[v] for v in e)) for e in edges))
        key = json.dumps([M.n, rows])
        if best is None or key < best:
            best = key
    assert best is not None  # permutations() yields the empty tuple even for n == 0
    return best
