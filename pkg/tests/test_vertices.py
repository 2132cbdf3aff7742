import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from entmeas.polytope import classical_max, enumerate_vertices, membership, vertex_matrix
from entmeas.polytope.vertices import is_extreme, strategy_table
from entmeas.scenario import UnsupportedScenarioError, Witness, load_table


def brute_force_tables(n):
    """All deterministic strategies by plain loops."""
    tables = set()
    for a in itertools.product(range(2), repeat=n):
        for b in itertools.product(range(2), repeat=n):
            for c in itertools.product(range(2), repeat=4):
                t = tuple(int(c[2 * a[x] + b[y]] == 0) for x in range(n) for y in range(n))
                tables.add(t)
    return tables


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_vertex_sets_match_brute_force(n):
    vs = enumerate_vertices(n)
    got = {tuple(v.table.ravel().tolist()) for v in vs}
    assert got == brute_force_tables(n)
    assert len(got) == len(vs)


def test_vertex_counts(vertices3, vertices4):
    assert len(enumerate_vertices(1)) == 2
    assert len(vertices3) == 104
    assert len(vertices4) == 520


def test_strategy_table_invariant(vertices3):
    for v in vertices3:
        expected = np.array([[int(v.charlie_map[a][b] == 0) for b in v.bob_map] for a in v.alice_map])
        assert np.array_equal(v.table, expected)
        assert np.array_equal(strategy_table(v.alice_map, v.bob_map, v.charlie_map), v.table)


def test_all_vertices_extreme_by_lp(vertices3):
    V = vertex_matrix(vertices3)
    for i in range(0, len(V), 13):
        assert is_extreme(V[i], np.delete(V, i, axis=0))
    # the centroid is not extreme
    assert not is_extreme(V.mean(axis=0), V)


def test_unsupported():
    with pytest.raises(UnsupportedScenarioError):
        enumerate_vertices(7)


def test_classical_max_is_lp_optimum(vertices3):
    rng = np.random.default_rng(7)
    V = vertex_matrix(vertices3).astype(float)
    for _ in range(50):
        w = rng.integers(-3, 4, size=(3, 3))
        ref = linprog(-V @ w.ravel(), A_eq=np.ones((1, len(V))), b_eq=[1], bounds=(0, None), method="highs")
        assert classical_max(Witness(w), vertices3) == pytest.approx(-ref.fun, abs=1e-9)


def test_classical_max_exact_types(vertices3):
    w = np.array([[Fraction(1, 3), 0, 0], [0, 0, 0], [0, 0, Fraction(-1, 2)]], dtype=object)
    assert classical_max(w, vertices3) == Fraction(1, 3)
    assert isinstance(classical_max(Witness(np.eye(3, dtype=int)), vertices3), int)


def test_membership_of_every_vertex(vertices3, vertices4):
    for vs in (vertices3, vertices4):
        for i, v in enumerate(vs):
            res = membership(v.table, vs)
            assert res.feasible and res.weights == {i: 1}


def test_membership_offdiag_table(data_dir, vertices3):
    p = load_table(data_dir / "table_offdiag_quarter.json")
    res = membership(p, vertices3)
    assert res.feasible
    assert sum(res.weights.values()) == 1
    V = vertex_matrix(vertices3)
    recon = sum(float(w) * V[i] for i, w in res.weights.items())
    assert np.allclose(recon, p.ravel(), atol=1e-12)
    # the four-strategy decomposition with weight 1/4 each is also a valid certificate
    parts = [np.array([[0, 1, 1], [0, 0, 0], [0, 0, 0]]), np.array([[0, 0, 0], [1, 0, 1], [0, 0, 0]]),
             np.array([[0, 0, 0], [0, 0, 0], [1, 1, 0]]), np.zeros((3, 3), dtype=int)]
    rows = {tuple(r) for r in V.tolist()}
    assert all(tuple(q.ravel().tolist()) in rows for q in parts)
    assert np.allclose(sum(parts) / 4, p)


def test_membership_entangled_table_is_separated(data_dir, vertices3):
    p = load_table(data_dir / "table_pent.json")
    res = membership(p, vertices3)
    assert not res.feasible
    sep = res.separator
    assert classical_max(sep, vertices3) <= sep.classical_bound
    assert float(np.sum(sep.coefficients * p)) > sep.classical_bound
    assert sep.coefficients.tolist() == [[-1, -1, 1], [1, 0, 1], [1, -1, -1]]
    assert float(np.sum(sep.coefficients * p)) == pytest.approx(2.5)


def test_membership_zero_table(vertices3):
    res = membership(np.zeros((3, 3)), vertices3)
    assert res.feasible and len(res.weights) == 1
    (i,) = res.weights
    assert not vertices3[i].table.any()
    assert np.all(vertices3[i].charlie_map == 1) or not vertices3[i].table.any()


def test_random_rational_points_inside_hull(vertices3):
    rng = np.random.default_rng(3)
    V = vertex_matrix(vertices3)
    for _ in range(10):
        k = rng.integers(1, 10, size=5)
        lam = [Fraction(int(v), int(k.sum())) for v in k]
        idx = rng.choice(len(V), 5, replace=False)
        p = np.array([sum(l * int(V[i, j]) for l, i in zip(lam, idx)) for j in range(9)],
                     dtype=object).reshape(3, 3)
        res = membership(p, vertices3)
        assert res.feasible
        recon = [sum(w * int(V[i, j]) for i, w in res.weights.items()) for j in range(9)]
        assert recon == p.ravel().tolist()


def test_float_points_on_faces_get_exact_verdicts(vertices3):
    # a float mixture of a few vertices sits on a face; after rounding the exact
    # point may fall just outside, and then the certificate must separate it exactly
    rng = np.random.default_rng(3)
    V = vertex_matrix(vertices3)
    for _ in range(10):
        lam = rng.dirichlet(np.ones(5))
        p = (lam @ V[rng.choice(len(V), 5, replace=False)]).reshape(3, 3)
        res = membership(p, vertices3)
        if res.feasible:
            recon = sum(float(w) * V[i] for i, w in res.weights.items())
            assert np.allclose(recon, p.ravel(), atol=1e-12)
        else:
            sep = res.separator
            exact_p = [Fraction(x) for x in p.ravel().tolist()]
            lhs = sum(int(c) * x for c, x in zip(sep.coefficients.ravel(), exact_p))
            assert lhs > sep.classical_bound >= classical_max(sep, vertices3)
            assert float(lhs - sep.classical_bound) < 1e-9
