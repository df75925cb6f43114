import numpy as np
import pytest

from rslab import FiniteStructure, Signature, Relation, binary_signature
from fractions import Fraction


def bernoulli_structure(rng: np.random.Generator, sig: Signature, n: int, p: float) -> FiniteStructure:
    """Dense-ish random structure: every k-set carries each relation w.p. p."""
    from itertools import combinations

    edges = []
    for rel in sig.relations:
        rows = [list(c) for c in combinations(range(n), rel.arity) if rng.random() < p]
        edges.append(rows)
    return FiniteStructure(sig, n, edges)


def mixed_signature(independence: bool = True) -> Signature:
    """Binary + ternary relations, for laws that must hold beyond graphs."""
    return Signature(
        relations=(
            Relation("R", 2, Fraction("0.55")),
            Relation("S", 3, Fraction("0.8")),
        ),
        independence=independence,
    )


@pytest.fixture
def sig7() -> Signature:
    return binary_signature("0.7")


@pytest.fixture
def sig55() -> Signature:
    return binary_signature("0.55")


def triangle(sig) -> FiniteStructure:
    return FiniteStructure(sig, 3, [[[0, 1], [1, 2], [0, 2]]])


def k4(sig) -> FiniteStructure:
    return FiniteStructure(sig, 4, [[[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]])


def single_edge(sig) -> FiniteStructure:
    return FiniteStructure(sig, 2, [[[0, 1]]])


def cherry(sig) -> FiniteStructure:
    """Vertex 2 adjacent to 0 and 1; no edge 01."""
    return FiniteStructure(sig, 3, [[[0, 2], [1, 2]]])
