import itertools

import numpy as np
import pytest

from clscore.complex import SimplicialComplex, Unit, CofaceSum, compute_weights


def closure(n, maximal):
    """Complex generated by the given maximal simplices (plus all vertices)."""
    faces = {}
    for s in maximal:
        s = tuple(sorted(s))
        for r in range(1, len(s) + 1):
            for f in itertools.combinations(s, r):
                faces.setdefault(r - 1, set()).add(f)
    faces.setdefault(0, set()).update((v,) for v in range(n))
    top = max(faces)
    return SimplicialComplex(n, tuple(sorted(faces.get(q, ())) for q in range(top + 1)))


def cycle(n):
    return closure(n, [(i, (i + 1) % n) for i in range(n)])


def path(n):
    return closure(n, [(i, i + 1) for i in range(n - 1)])


def k3_graph():
    return closure(3, [(0, 1), (1, 2), (0, 2)])


def filled_triangle():
    return closure(3, [(0, 1, 2)])


def tetra_boundary():
    return closure(4, list(itertools.combinations(range(4), 3)))


def two_triangles():
    return closure(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def unit(k):
    return compute_weights(k, Unit())


def coface(k):
    return compute_weights(k, CofaceSum())


def edge_values(k, mapping):
    """Cochain on edges from {(i, j): value} in canonical edge order."""
    edges = [tuple(e) for e in k.simplices[1].tolist()]
    assert set(edges) == set(mapping)
    return np.array([mapping[e] for e in edges], dtype=float)


def random_points(rng, n, dim=2):
    return rng.uniform(size=(n, dim))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria register their outcome here; printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
