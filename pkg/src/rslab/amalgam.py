"""Free joins, the full-amalgamation generic builder, semigenericity checks."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    ISO,
    Embedding,
    FiniteStructure,
    InputError,
    Signature,
    canonical_key,
    enumerate_embeddings,
)
from .extcalc import (
    ExtensionPattern,
    _validate_base_embedding,
    closure,
    in_K0_plus,
    is_strong,
    strong_in,
)


def _free_join_maps(
    B: FiniteStructure,
    base_b: Sequence[int],
    C: FiniteStructure,
    base_c: Sequence[int],
) -> tuple[FiniteStructure, dict, dict]:
    """D = B (x)_A C with B keeping its labels; returns (D, b_map, c_map)."""
    if len(base_b) != len(base_c):
        raise InputError("base correspondence lengths differ")
    if len(set(base_b)) != len(base_b) or len(set(base_c)) != len(base_c):
        raise InputError("base correspondence must be injective")
    if B.sig != C.sig:
        raise InputError("structures over different signatures")
    corr = dict(zip(base_c, base_b))
    # the correspondence must be an isomorphism of the induced base structures
    bset, cset = set(base_b), set(base_c)
    for i in range(B.sig.p):
        b_inner = {e for e in B.edge_sets[i] if all(v in bset for v in e)}
        c_inner = {tuple(sorted(corr[v] for v in e))
                   for e in C.edge_sets[i] if all(v in cset for v in e)}
        if b_inner != c_inner:
            raise InputError("base correspondence is not an isomorphism")

    rest = sorted(set(range(C.n)) - cset)
    c_map = dict(corr)
    for j, v in enumerate(rest):
        c_map[v] = B.n + j
    b_map = {v: v for v in range(B.n)}

    arrays = []
    for i in range(B.sig.p):
        rows = [list(e) for e in B.edge_sets[i]]
        for e in C.edge_sets[i]:
            if not all(v in cset for v in e):
                rows.append([c_map[v] for v in e])
        arrays.append(rows)
    D = FiniteStructure(B.sig, B.n + len(rest), arrays)
    return D, b_map, c_map


def free_join(
    B: FiniteStructure,
    base_b: Sequence[int],
    C: FiniteStructure,
    base_c: Sequence[int],
) -> FiniteStructure:
    """Union over the shared base with no relations beyond those of B and C."""
    D, _, _ = _free_join_maps(B, base_b, C, base_c)
    return D


def check_full_amalgamation(
    B: FiniteStructure,
    base_b: Sequence[int],
    C: FiniteStructure,
    base_c: Sequence[int],
) -> bool:
    """Build D = B (x)_A C and verify D hereditarily nonnegative and C <=s D.

    Requires A <=s B; a violated precondition raises rather than returning
    a verdict.
    """
    if not strong_in(B, set(base_b), range(B.n)):
        raise ValueError("precondition failed: base is not strong in B")
    D, _, c_map = _free_join_maps(B, base_b, C, base_c)
    c_image = {c_map[v] for v in range(C.n)}
    return in_K0_plus(D) and strong_in(D, c_image, range(D.n))


# -- generic builder ----------------------------------------------------


def _pair_key(B: FiniteStructure, base_size: int) -> str:
    """Canonical key of the pair (base, B): base and new vertices permute separately."""
    best = None
    for pa in permutations(range(base_size)):
        for pn in permutations(range(base_size, B.n)):
            relabel = dict(zip(range(base_size), pa))
            relabel.update(dict(zip(range(base_size, B.n), pn)))
            rows = [sorted(tuple(sorted(relabel[v] for v in e)) for e in edges)
                    for edges in B.edge_sets]
            key = json.dumps([B.n, base_size, rows])
            if best is None or key < best:
                best = key
    assert best is not None
    return best


@dataclass(frozen=True)
class TaskType:
    """An extension task: realize B over every strong copy of its base."""

    A: FiniteStructure
    B: FiniteStructure
    key: str  # canonical pair key; base vertices of B are 0..|A|-1

    @property
    def v(self) -> int:
        return self.B.n - self.A.n


def _edge_slots(sig: Signature, verts: Sequence[int], must_touch: set | None = None):
    slots = []
    for i, rel in enumerate(sig.relations):
        for combo in combinations(verts, rel.arity):
            if must_touch is None or any(v in must_touch for v in combo):
                slots.append((i, combo))
    return slots


def _structures_on(sig: Signature, n: int, fixed_edges, free_slots):
    """All structures on n vertices containing fixed_edges plus any subset of free_slots."""
    if len(free_slots) > 20:
        raise ValueError(f"{len(free_slots)} candidate hyperedges; pattern budget too large")
    for mask in range(1 << len(free_slots)):
        arrays: list[list] = [list(rows) for rows in fixed_edges]
        for j, (i, combo) in enumerate(free_slots):
            if mask >> j & 1:
                arrays[i].append(list(combo))
        yield FiniteStructure(sig, n, arrays)


def enumerate_base_types(sig: Signature, base_max: int) -> list[FiniteStructure]:
    """Isomorphism types with <= base_max vertices that embed strongly over the empty set."""
    out: list[FiniteStructure] = []
    seen: set[str] = set()
    for a in range(base_max + 1):
        fixed = [[] for _ in sig.relations]
        for A in _structures_on(sig, a, fixed, _edge_slots(sig, range(a))):
            if not strong_in(A, set(), range(a)):
                continue
            if not in_K0_plus(A):
                continue
            key = canonical_key(A)
            if key not in seen:
                seen.add(key)
                out.append(A)
    return out


def enumerate_extension_tasks(sig: Signature, base_max: int, v_max: int) -> list[TaskType]:
    """All strong extension types (A, B) with |A| <= base_max, 1 <= |B-A| <= v_max."""
    tasks: list[TaskType] = []
    seen: set[str] = set()
    for A in enumerate_base_types(sig, base_max):
        a = A.n
        for v in range(1, v_max + 1):
            nb = a + v
            fixed = [[list(e) for e in edges] for edges in A.edge_sets]
            slots = _edge_slots(sig, range(nb), must_touch=set(range(a, nb)))
            for B in _structures_on(sig, nb, fixed, slots):
                if not in_K0_plus(B):
                    continue
                if not strong_in(B, set(range(a)), range(nb)):
                    continue
                key = _pair_key(B, a)
                if key in seen:
                    continue
                seen.add(key)
                tasks.append(TaskType(A=A, B=B, key=key))
    tasks.sort(key=lambda t: (t.A.n, t.v, t.key))
    return tasks


@dataclass
class TaskRecord:
    stage_index: int
    task_key: str
    base_image: tuple[int, ...]  # host vertices carrying the base, in B-base order
    new_vertices: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "stage": self.stage_index,
            "task": self.task_key,
            "base_image": list(self.base_image),
            "new_vertices": list(self.new_vertices),
        }


@dataclass
class GenericChain:
    """A strong chain of stages together with the tasks that built it."""

    sig: Signature
    stages: list[FiniteStructure]
    task_log: list[TaskRecord]
    tasks: list[TaskType]
    unserved: list[str]
    size_bound: int
    seed: int

    @property
    def final(self) -> FiniteStructure:
        return self.stages[-1]

    def served_keys(self) -> set[str]:
        return {rec.task_key for rec in self.task_log}

    def to_json_dict(self) -> dict:
        return {
            "size_bound": self.size_bound,
            "seed": self.seed,
            "stages": [m.to_json_dict() for m in self.stages],
            "log": [rec.to_json_dict() for rec in self.task_log],
            "task_types": [t.key for t in self.tasks],
            "unserved": list(self.unserved),
        }


def validate_chain(chain: GenericChain, hereditary_cap: int | None = 6) -> None:
    """Re-validate the chain certificate; raises AssertionError on failure."""
    stages = chain.stages
    for s, (small, big) in enumerate(zip(stages, stages[1:])):
        assert big.induced(range(small.n)) == small, f"stage {s} not an induced prefix"
        assert strong_in(big, set(range(small.n)), range(big.n)), f"stage {s} not strong in {s+1}"
    for s, M in enumerate(stages):
        assert in_K0_plus(M, size_cap=hereditary_cap), f"stage {s} leaves the hereditary class"
    for rec in chain.task_log:
        assert 0 <= rec.stage_index < len(stages) - 1
        nxt = stages[rec.stage_index + 1]
        prev = stages[rec.stage_index]
        assert set(rec.new_vertices) == set(range(prev.n, nxt.n)), "log vertices inconsistent"


def build_generic(
    sig: Signature,
    size_bound: int = 64,
    v_max: int = 2,
    seed: int = 0,
    base_max: int = 2,
) -> GenericChain:
    """Grow a strong chain by free-joining every enumerated strong extension type.

    Tasks are served FIFO and re-queued, approximating the fairness of the
    limit construction at desk scale; host embeddings come from a registry
    of substructures certified strong by the construction itself.
    """
    if v_max > 4:
        raise ValueError("v_max above 4 is not desk scale")
    tasks = enumerate_extension_tasks(sig, base_max, v_max)
    rng = np.random.default_rng(seed)

    empty = FiniteStructure(sig, 0, [[] for _ in sig.relations])
    stages = [empty]
    log: list[TaskRecord] = []
    registry: dict[str, list[tuple[int, ...]]] = {}
    registered: set[tuple[int, ...]] = set()

    def register(host_vertices: tuple[int, ...], key: str):
        if host_vertices in registered:
            return
        registered.add(host_vertices)
        registry.setdefault(key, []).append(host_vertices)

    register((), canonical_key(empty))

    queue = deque(tasks)
    stalls = 0
    while queue:
        M = stages[-1]
        task = queue.popleft()
        if M.n + task.v > size_bound:
            break
        a_key = canonical_key(task.A)
        hosts = registry.get(a_key, [])
        if not hosts:
            queue.append(task)
            stalls += 1
            if stalls > len(queue):
                break
            continue
        stalls = 0
        host = hosts[int(rng.integers(len(hosts)))]
        # concrete iso from the task's base onto the host set
        host_struct = M.induced(host)
        lift = dict(enumerate(sorted(host)))
        f = None
        for emb in enumerate_embeddings(task.A, host_struct, mode=ISO):
            f = tuple(lift[u] for u in emb.map)
            break
        assert f is not None, "registry host does not match its recorded type"

        new_ids = tuple(range(M.n, M.n + task.v))
        vmap = {i: f[i] for i in range(task.A.n)}
        vmap.update({task.A.n + j: new_ids[j] for j in range(task.v)})
        arrays = [[list(e) for e in edges] for edges in M.edge_sets]
        aset = set(range(task.A.n))
        for i in range(sig.p):
            for e in task.B.edge_sets[i]:
                if not all(v in aset for v in e):
                    arrays[i].append([vmap[v] for v in e])
        nxt = FiniteStructure(sig, M.n + task.v, arrays)

        # construction certificate, checked as we go
        assert strong_in(nxt, set(range(M.n)), range(nxt.n))
        stages.append(nxt)
        log.append(TaskRecord(
            stage_index=len(stages) - 2,
            task_key=task.key,
            base_image=f,
            new_vertices=new_ids,
        ))
        b_image = tuple(vmap[v] for v in range(task.B.n))
        for size in range(0, task.B.n + 1):
            for sub in combinations(range(task.B.n), size):
                if strong_in(task.B, set(sub), range(task.B.n)):
                    img = tuple(sorted(b_image[v] for v in sub))
                    register(img, canonical_key(task.B.induced(sub)))
        queue.append(task)

    served = {rec.task_key for rec in log}
    unserved = [t.key for t in tasks if t.key not in served]
    return GenericChain(
        sig=sig,
        stages=stages,
        task_log=log,
        tasks=tasks,
        unserved=unserved,
        size_bound=size_bound,
        seed=seed,
    )


# -- semigenericity -----------------------------------------------------


def closure_matches(G: FiniteStructure, A: Iterable[int], C: Iterable[int], m: int) -> bool:
    """Semantic closure-type check: cl^m_G(A) == C."""
    aset, cset = set(A), set(C)
    if not aset <= cset:
        raise ValueError("A must be contained in C")
    for v in cset:
        if not (0 <= v < G.n):
            raise ValueError(f"vertex {v} outside universe")
    return closure(G, aset, m) == cset


def semigeneric_witness(
    G: FiniteStructure,
    f: Mapping[int, int],
    pat: ExtensionPattern,
    m: int,
) -> Embedding | None:
    """First extension of f realizing the pattern freely at closure level m.

    Searches iso-mode extensions g of f to the whole pattern; a witness g
    satisfies cl^m(gB) = gB + cl^m(fA) and the structure induced on
    cl^m(fA) + gB is the free join of the two over fA.  None is a
    legitimate outcome (the event simply fails here).
    """
    if not is_strong(pat):
        raise ValueError("pattern base is not strong in the whole")
    _validate_base_embedding(G, pat, f)
    f = dict(f)
    fa = frozenset(f.values())
    cl_a = frozenset(closure(G, fa, m))
    for emb in enumerate_embeddings(pat.whole, G, partial=f, mode=ISO):
        image = emb.image_set()
        if (cl_a & image) != fa:
            continue
        if not _freely_joined(G, cl_a, image, fa):
            continue
        if frozenset(closure(G, image, m)) != (image | cl_a):
            continue
        return emb
    return None


def _freely_joined(G: FiniteStructure, left: frozenset, right: frozenset, base: frozenset) -> bool:
    """No hyperedge inside left+right except those inside left or inside right."""
    union = left | right
    for v in union:
        for _, e in G.incidence[v]:
            if all(u in union for u in e):
                if not (all(u in left for u in e) or all(u in right for u in e)):
                    return False
    return True
