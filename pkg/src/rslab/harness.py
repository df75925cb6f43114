"""Experiment driver: scaling measurements with deterministic seeded trials.

Every experiment returns an ExperimentReport whose JSON/CSV content is a
pure function of (config, seed); wall-clock columns are the one exception
and can be stripped for byte-comparison.  Trials are independent jobs:
with threads > 1 they run in a process pool and are folded back in trial
order, so parallel and serial runs agree.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, islice, permutations
from typing import Callable, Sequence

import numpy as np

from .core import HOM, ISO, FiniteStructure, Signature, canonical_key, enumerate_embeddings
from .detect import has_weak_copy
from .dimension import NEGATIVE, delta
from .extcalc import ExtensionPattern, closure, has_negative_subset, is_strong
from .amalgam import semigeneric_witness
from .sampler import SampleConfig, sample, trial_rng


@dataclass
class Row:
    n: int
    trials: int
    mean: float
    min: float
    max: float
    stddev: float
    freq: float
    seconds: float

    def to_json_dict(self, timing: bool = True) -> dict:
        d = {
            "n": self.n,
            "trials": self.trials,
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "stddev": self.stddev,
            "freq": self.freq,
        }
        if timing:
            d["seconds"] = self.seconds
        return d


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    rows: list[Row]
    slope: float | None
    residual: float | None
    capped: bool = False
    notes: list[str] = field(default_factory=list)

    def to_json_dict(self, timing: bool = True) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "rows": [r.to_json_dict(timing) for r in self.rows],
            "slope": self.slope,
            "residual": self.residual,
            "capped": self.capped,
            "notes": self.notes,
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_json_dict(timing), separators=(",", ":")) + "\n"

    def to_csv(self) -> str:
        lines = ["n,trials,mean,min,max,stddev,freq,seconds"]
        for r in self.rows:
            lines.append(
                f"{r.n},{r.trials},{r.mean!r},{r.min!r},{r.max!r},"
                f"{r.stddev!r},{r.freq!r},{r.seconds!r}"
            )
        return "\n".join(lines) + "\n"


def fit_loglog(ns: Sequence[float], means: Sequence[float]) -> tuple[float | None, float | None]:
    """OLS slope of ln(mean) against ln(n), using rows with positive mean."""
    pts = [(math.log(n), math.log(m)) for n, m in zip(ns, means) if m > 0]
    if len(pts) < 2:
        return None, None
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    xbar, ybar = xs.mean(), ys.mean()
    denom = ((xs - xbar) ** 2).sum()
    if denom == 0:
        return None, None
    slope = float(((xs - xbar) * (ys - ybar)).sum() / denom)
    resid = ys - (ybar + slope * (xs - xbar))
    return slope, float(np.sqrt((resid**2).mean()))


def _run_trials(worker: Callable, argses: list, threads: int) -> list:
    if threads <= 1:
        return [worker(a) for a in argses]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(worker, argses, chunksize=max(1, len(argses) // (threads * 4))))


def _per_n_trials(trials, n_grid) -> list[int]:
    if isinstance(trials, int):
        return [trials] * len(n_grid)
    out = list(trials)
    if len(out) != len(n_grid):
        raise ValueError("per-n trial list must match the n-grid length")
    return out


def _aggregate(values: list[float], events: list[bool], n: int, seconds: float) -> Row:
    arr = np.array(values, dtype=float)
    return Row(
        n=n,
        trials=len(values),
        mean=float(arr.mean()),
        min=float(arr.min()),
        max=float(arr.max()),
        stddev=float(arr.std()),
        freq=float(np.mean([1.0 if e else 0.0 for e in events])),
        seconds=seconds,
    )


# -- extension count scaling --------------------------------------------


def _sample_injections(rng, n: int, a: int, cap: int) -> tuple[list[tuple[int, ...]], bool]:
    total = math.perm(n, a)
    if total <= cap:
        return list(permutations(range(n), a)), False
    draws = [tuple(int(x) for x in rng.choice(n, size=a, replace=False)) for _ in range(cap)]
    return draws, True


def _ext_stats_trial(args):
    pat, n, seed, trial, cap, c1 = args
    G = sample(SampleConfig(n, pat.whole.sig, seed, trial))
    base = sorted(pat.base)
    rng = trial_rng(seed, trial, stream=1)
    fs, capped = _sample_injections(rng, n, len(base), cap)
    v = pat.v
    dval = pat.delta_rel.value
    lo = n**dval * math.log(n) ** (-(v + 1))
    hi = c1 * n**dval
    counts = []
    for f in fs:
        partial = dict(zip(base, f))
        c = sum(1 for _ in enumerate_embeddings(pat.whole, G, partial=partial,
                                                mode=HOM, base=pat.base))
        counts.append(c)
    y_all = all(lo < c < hi for c in counts)
    return (float(np.mean(counts)), float(min(counts)), float(max(counts)), y_all, capped)


def ext_stats(
    pat: ExtensionPattern,
    n_grid: Sequence[int],
    trials: int | Sequence[int],
    seed: int,
    c1: float = 10.0,
    cap: int = 200,
    threads: int = 1,
) -> ExperimentReport:
    """Counts of homomorphism extensions over sampled hosts, against n^delta.

    Per trial, f runs over (a capped uniform subsample of) the injections
    of the base vertex set into the bare universe; the per-trial statistic
    is the mean extension count over f, and the recorded event is the
    two-sided n^delta bound holding for every sampled f.
    """
    if not is_strong(pat):
        raise ValueError("pattern base must be strong in the whole")
    if pat.v > 3:
        raise ValueError("extension statistics are desk-scale: v must be <= 3")
    rows: list[Row] = []
    capped_any = False
    for n, t_n in zip(n_grid, _per_n_trials(trials, n_grid)):
        t0 = time.perf_counter()
        results = _run_trials(
            _ext_stats_trial,
            [(pat, n, seed, t, cap, c1) for t in range(t_n)],
            threads,
        )
        means = [r[0] for r in results]
        mins = [r[1] for r in results]
        maxes = [r[2] for r in results]
        events = [r[3] for r in results]
        capped_any = capped_any or any(r[4] for r in results)
        arr = np.array(means)
        rows.append(Row(
            n=n, trials=t_n,
            mean=float(arr.mean()), min=float(min(mins)), max=float(max(maxes)),
            stddev=float(arr.std()), freq=float(np.mean(events)),
            seconds=time.perf_counter() - t0,
        ))
    slope, resid = fit_loglog([r.n for r in rows], [r.mean for r in rows])
    return ExperimentReport(
        experiment="ext-stats",
        config={
            "pattern": pat.to_json_dict(),
            "sig": pat.whole.sig.to_json_dict(),
            "n_grid": list(n_grid),
            "trials": _per_n_trials(trials, n_grid),
            "seed": seed,
            "c1": c1,
            "cap": cap,
            "delta": pat.delta_rel.to_json_dict(),
        },
        rows=rows,
        slope=slope,
        residual=resid,
        capped=capped_any,
    )


# -- rare substructures --------------------------------------------------


def _rare_trial(args):
    B, n, seed, trial = args
    G = sample(SampleConfig(n, B.sig, seed, trial))
    return 1.0 if has_weak_copy(B, G) else 0.0


def rare_substructure(
    B: FiniteStructure,
    n_grid: Sequence[int],
    trials: int | Sequence[int],
    seed: int,
    threads: int = 1,
) -> ExperimentReport:
    """Frequency of any copy of a negative-dimension pattern appearing."""
    if delta(B).sign() != NEGATIVE:
        raise ValueError("pattern must have negative dimension")
    per_n = _per_n_trials(trials, n_grid)
    rows: list[Row] = []
    for n, t_n in zip(n_grid, per_n):
        t0 = time.perf_counter()
        found = _run_trials(_rare_trial, [(B, n, seed, t) for t in range(t_n)], threads)
        rows.append(_aggregate(found, [f > 0 for f in found], n, time.perf_counter() - t0))
    slope, resid = fit_loglog([r.n for r in rows], [r.freq for r in rows])
    return ExperimentReport(
        experiment="rare",
        config={
            "structure": B.to_json_dict(),
            "sig": B.sig.to_json_dict(),
            "n_grid": list(n_grid),
            "trials": per_n,
            "seed": seed,
            "delta": delta(B).to_json_dict(),
        },
        rows=rows,
        slope=slope,
        residual=resid,
    )


# -- empty closure --------------------------------------------------------


def _empty_closure_trial(args):
    sig, m, n, seed, trial = args
    G = sample(SampleConfig(n, sig, seed, trial))
    via_closure = closure(G, set(), m, method="components") == set()
    via_violator = not has_negative_subset(G, m - 1)
    if via_closure != via_violator:
        raise RuntimeError(
            f"closure and negative-subset checks disagree at n={n} trial={trial}"
        )
    return 1.0 if via_closure else 0.0


def empty_closure(
    sig: Signature,
    m: int,
    n_grid: Sequence[int],
    trials: int | Sequence[int],
    seed: int,
    threads: int = 1,
) -> ExperimentReport:
    """Frequency of cl^m(empty) = empty; cross-checked against the
    equivalent "no small negative-dimension subset embeds" test."""
    if m > 5:
        raise ValueError("empty-closure search is desk-scale: m must be <= 5")
    rows: list[Row] = []
    for n, t_n in zip(n_grid, _per_n_trials(trials, n_grid)):
        t0 = time.perf_counter()
        oks = _run_trials(
            _empty_closure_trial, [(sig, m, n, seed, t) for t in range(t_n)], threads
        )
        rows.append(_aggregate(oks, [o > 0 for o in oks], n, time.perf_counter() - t0))
    return ExperimentReport(
        experiment="empty-closure",
        config={"sig": sig.to_json_dict(), "m": m, "n_grid": list(n_grid),
                "trials": _per_n_trials(trials, n_grid), "seed": seed},
        rows=rows,
        slope=None,
        residual=None,
    )


# -- semigenericity -------------------------------------------------------


def _is_iso_assignment(A: FiniteStructure, G: FiniteStructure, f: tuple[int, ...]) -> bool:
    full = dict(enumerate(f))
    return next(iter(enumerate_embeddings(A, G, partial=full, mode=ISO)), None) is not None


def _iso_embeddings_capped(A: FiniteStructure, G: FiniteStructure, rng, cap: int):
    """Iso-mode embeddings of A into G, uniformly subsampled past the cap.

    Bases with at most one vertex embed as plain injections; edgeless
    larger bases are drawn by rejection (injections are mostly induced
    copies in sparse hosts); anything else is enumerated outright.
    """
    total_inj = math.perm(G.n, A.n)
    if A.n <= 1:
        if total_inj > cap:
            draws = [tuple(int(x) for x in rng.choice(G.n, size=A.n, replace=False))
                     for _ in range(cap)]
            return draws, True
        return list(permutations(range(G.n), A.n)), False
    if A.edge_counts == tuple(0 for _ in A.sig.relations) and total_inj > 50 * cap:
        draws = []
        misses = 0
        while len(draws) < cap and misses < 200 * cap:
            f = tuple(int(x) for x in rng.choice(G.n, size=A.n, replace=False))
            if _is_iso_assignment(A, G, f):
                draws.append(f)
            else:
                misses += 1
        if len(draws) < cap:
            raise ValueError("rejection sampling of base embeddings failed; host too dense")
        return draws, True
    embs = []
    for emb in islice(enumerate_embeddings(A, G, mode=ISO), 200_000):
        embs.append(emb.map)
    if len(embs) == 200_000:
        raise ValueError("too many base embeddings; use a smaller base or host")
    if len(embs) > cap:
        idx = rng.choice(len(embs), size=cap, replace=False)
        return [embs[int(i)] for i in sorted(idx)], True
    return embs, False


def _zero_one_trial(args):
    pat, m, n, seed, trial, cap = args
    G = sample(SampleConfig(n, pat.whole.sig, seed, trial))
    base = sorted(pat.base)
    A_struct = pat.whole.induced(base)
    rng = trial_rng(seed, trial, stream=1)
    fs, capped = _iso_embeddings_capped(A_struct, G, rng, cap)
    if not fs:
        return (0.0, False, capped)
    ok = 0
    for f in fs:
        f_map = {base[i]: f[i] for i in range(len(base))}
        if semigeneric_witness(G, f_map, pat, m) is not None:
            ok += 1
    return (ok / len(fs), ok == len(fs), capped)


def zero_one(
    pat: ExtensionPattern,
    m: int,
    n_grid: Sequence[int],
    trials: int | Sequence[int],
    seed: int,
    cap: int = 200,
    threads: int = 1,
) -> ExperimentReport:
    """Frequency of "every base embedding extends to a semigeneric witness"."""
    if pat.v > 2 or m > 2:
        raise ValueError("zero-one experiment is desk-scale: v <= 2 and m <= 2")
    if not is_strong(pat):
        raise ValueError("pattern base must be strong in the whole")
    rows: list[Row] = []
    capped_any = False
    for n, t_n in zip(n_grid, _per_n_trials(trials, n_grid)):
        t0 = time.perf_counter()
        results = _run_trials(
            _zero_one_trial, [(pat, m, n, seed, t, cap) for t in range(t_n)], threads
        )
        fracs = [r[0] for r in results]
        events = [r[1] for r in results]
        capped_any = capped_any or any(r[2] for r in results)
        rows.append(_aggregate(fracs, events, n, time.perf_counter() - t0))
    return ExperimentReport(
        experiment="zero-one",
        config={
            "pattern": pat.to_json_dict(),
            "sig": pat.whole.sig.to_json_dict(),
            "m": m,
            "n_grid": list(n_grid),
            "trials": _per_n_trials(trials, n_grid),
            "seed": seed,
            "cap": cap,
        },
        rows=rows,
        slope=None,
        residual=None,
        capped=capped_any,
    )


# -- quantifier-elimination probe ----------------------------------------


def _binary_relations(sig: Signature) -> list[int]:
    return [i for i, r in enumerate(sig.relations) if r.arity == 2]


def _formula_schema(sig: Signature, r: int, depth: int):
    """Fixed finite schema over binary relations: atomic sign patterns plus
    one or two quantifier blocks.  Formulas are closure-style semantic
    objects: callables on (adjacency bool matrices, tuple)."""
    rels = _binary_relations(sig)
    atoms = [(i, a, b) for i in rels for a, b in combinations(range(r), 2)]
    y_lits = [(i, a) for i in rels for a in range(r)]
    z_lits_x = [(i, a) for i in rels for a in range(r)]

    formulas = []

    for i, a, b in atoms:
        formulas.append(("atom", (i, a, b)))
    if depth >= 1:
        for signs in range(1 << len(y_lits)):
            formulas.append(("e1", signs))
    if depth >= 2:
        z_count = len(z_lits_x) + len(rels)  # x-z literals plus one y-z literal per relation
        for tau in range(1 << len(y_lits)):
            for sigma in range(1 << z_count):
                formulas.append(("e2", (tau, sigma, True)))
                formulas.append(("e2", (tau, sigma, False)))
    return formulas, y_lits, z_lits_x, rels


def _eval_formula(formula, adj: list[np.ndarray], tup: tuple[int, ...],
                  y_lits, z_lits_x, rels) -> bool:
    kind, payload = formula
    n = adj[0].shape[0] if adj else 0
    if kind == "atom":
        i, a, b = payload
        return bool(adj[i][tup[a], tup[b]])
    if kind == "e1":
        signs = payload
        vec = np.ones(n, dtype=bool)
        for j, (i, a) in enumerate(y_lits):
            row = adj[i][tup[a]]
            vec &= row if (signs >> j & 1) else ~row
        return bool(vec.any())
    if kind == "e2":
        tau, sigma, want_exists = payload
        vec = np.ones(n, dtype=bool)
        for j, (i, a) in enumerate(y_lits):
            row = adj[i][tup[a]]
            vec &= row if (tau >> j & 1) else ~row
        zmask = np.ones(n, dtype=bool)
        for j, (i, a) in enumerate(z_lits_x):
            row = adj[i][tup[a]]
            zmask &= row if (sigma >> j & 1) else ~row
        # y-z literals, one per relation, vectorized over y
        exists_z = np.ones((n,), dtype=bool)
        mat = np.broadcast_to(zmask, (n, n)).copy()
        for j, i in enumerate(rels):
            bit = sigma >> (len(z_lits_x) + j) & 1
            mat &= adj[i] if bit else ~adj[i]
        exists_z = mat.any(axis=1)
        good = vec & (exists_z if want_exists else ~exists_z)
        return bool(good.any())
    raise AssertionError(f"unknown formula kind {kind}")


def _closure_type_key(G: FiniteStructure, tup: tuple[int, ...], ell: int, max_extra: int = 6):
    cl = closure(G, set(tup), ell)
    if len(cl) - len(set(tup)) > max_extra:
        return None
    verts = sorted(cl)
    relabel = {v: i for i, v in enumerate(verts)}
    sub = G.induced(verts)
    pinned = [relabel[v] for v in tup]
    order = pinned + [i for i in range(len(verts)) if i not in set(pinned)]
    # move pinned vertices to the front so the key fixes the tuple pointwise
    perm = {old: new for new, old in enumerate(order)}
    arrays = [[[perm[v] for v in e] for e in edges] for edges in sub.edge_sets]
    sub2 = FiniteStructure(G.sig, sub.n, arrays)
    return canonical_key(sub2, fixed=tuple(range(len(tup))))


def formula_agreement(
    G1: FiniteStructure,
    t1: tuple[int, ...],
    G2: FiniteStructure,
    t2: tuple[int, ...],
    depth: int,
) -> float:
    """Fraction of schema formulas valued identically on (G1,t1) and (G2,t2)."""
    if len(t1) != len(t2):
        raise ValueError("tuples must have equal length")
    formulas, y_lits, z_lits_x, rels = _formula_schema(G1.sig, len(t1), depth)
    if not formulas:
        return 1.0
    adj1, adj2 = _dense_adjacency(G1), _dense_adjacency(G2)
    agree = sum(
        _eval_formula(f, adj1, t1, y_lits, z_lits_x, rels)
        == _eval_formula(f, adj2, t2, y_lits, z_lits_x, rels)
        for f in formulas
    )
    return agree / len(formulas)


def qe_probe(
    G1: FiniteStructure,
    G2: FiniteStructure,
    ell: int,
    depth: int,
    tuple_len: int = 1,
    pairs: int = 50,
    seed: int = 0,
) -> ExperimentReport:
    """Agreement of a fixed formula schema on tuples with isomorphic closures.

    Samples tuples from both hosts, matches them by the isomorphism type
    of their level-ell closure (tuple pinned), and evaluates every formula
    of the schema on both sides.  Only binary relations enter the schema.
    """
    if depth > 2 or tuple_len > 2:
        raise ValueError("probe is desk-scale: depth <= 2 and tuple length <= 2")
    if not _binary_relations(G1.sig):
        raise ValueError("the formula schema needs at least one binary relation")
    rng = np.random.default_rng(seed)
    notes: list[str] = []

    def tuples_of(G: FiniteStructure, count: int):
        out = {}
        attempts = 0
        while len(out) < count and attempts < count * 20:
            attempts += 1
            tup = tuple(int(x) for x in rng.choice(G.n, size=tuple_len, replace=False))
            key = _closure_type_key(G, tup, ell)
            if key is not None:
                out.setdefault(key, []).append(tup)
        return out

    pool1 = tuples_of(G1, pairs * 2)
    pool2 = tuples_of(G2, pairs * 2)
    matched: list[tuple[tuple, tuple]] = []
    for key, tups1 in sorted(pool1.items()):
        for t1, t2 in zip(tups1, pool2.get(key, [])):
            matched.append((t1, t2))
            if len(matched) >= pairs:
                break
        if len(matched) >= pairs:
            break

    formulas, y_lits, z_lits_x, rels = _formula_schema(G1.sig, tuple_len, depth)
    adj1 = _dense_adjacency(G1)
    adj2 = _dense_adjacency(G2)
    agreements = []
    for t1, t2 in matched:
        if not formulas:
            agreements.append(1.0)  # vacuous schema (e.g. depth 0 on 1-tuples)
            continue
        agree = 0
        for fml in formulas:
            v1 = _eval_formula(fml, adj1, t1, y_lits, z_lits_x, rels)
            v2 = _eval_formula(fml, adj2, t2, y_lits, z_lits_x, rels)
            agree += v1 == v2
        agreements.append(agree / len(formulas))
    if not matched:
        notes.append("inconclusive: no tuple pairs with isomorphic closures found")
        rows = [Row(n=G1.n, trials=0, mean=0.0, min=0.0, max=0.0,
                    stddev=0.0, freq=0.0, seconds=0.0)]
    else:
        rows = [_aggregate(agreements, [a == 1.0 for a in agreements], G1.n, 0.0)]
    return ExperimentReport(
        experiment="qe-probe",
        config={
            "sig": G1.sig.to_json_dict(),
            "ell": ell,
            "depth": depth,
            "tuple_len": tuple_len,
            "pairs_requested": pairs,
            "pairs_matched": len(matched),
            "formula_count": len(formulas),
            "seed": seed,
        },
        rows=rows,
        slope=None,
        residual=None,
        notes=notes,
    )


def _dense_adjacency(G: FiniteStructure) -> list[np.ndarray]:
    if G.n > 4096:
        raise ValueError("dense adjacency refused above n = 4096")
    out = []
    for i, rel in enumerate(G.sig.relations):
        mat = np.zeros((G.n, G.n), dtype=bool)
        if rel.arity == 2 and G.arrays[i].size:
            e = G.arrays[i]
            mat[e[:, 0], e[:, 1]] = True
            mat[e[:, 1], e[:, 0]] = True
        out.append(mat)
    return out
