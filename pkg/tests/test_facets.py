import json

import numpy as np
import pytest

from entmeas import symmetry
from entmeas.polytope import (FacetEnumerationError, affine_rank, classical_max, enumerate_facets,
                              enumerate_vertices, facet_classes, is_facet, is_positivity_facet,
                              vertex_matrix)
from entmeas.polytope.facets import exact_rank
from entmeas.scenario import Witness


def numpy_facet_oracle(w, V):
    """Independent float check: validity, then rank of tight-vertex differences."""
    vals = V @ np.asarray(w.coefficients).ravel()
    if vals.max() > w.classical_bound:
        return False, int(np.sum(vals == w.classical_bound))
    tight = V[vals == w.classical_bound]
    if len(tight) < V.shape[1]:
        return False, len(tight)
    return np.linalg.matrix_rank((tight[1:] - tight[0]).astype(float)) == V.shape[1] - 1, len(tight)


def catalog(data_dir, name):
    return json.loads((data_dir / f"{name}.json").read_text())["rows"]


def test_small_facet_counts():
    assert len(enumerate_facets(enumerate_vertices(1))) == 2
    assert len(enumerate_facets(enumerate_vertices(2))) == 8


def test_facet_count_322(facets3):
    assert len(facets3) == 1230
    assert sum(is_positivity_facet(f) for f in facets3) == 9


def test_every_facet_rechecked(facets3, vertices3):
    V = vertex_matrix(vertices3)
    for f in facets3:
        ok, n_tight = is_facet(f.witness, vertices3)
        assert ok and n_tight == f.n_tight
        assert classical_max(f.witness, vertices3) == f.witness.classical_bound
    for f in facets3[::37]:
        assert numpy_facet_oracle(f.witness, V) == (True, f.n_tight)


def test_vertex_order_does_not_matter(facets3, vertices3):
    rng = np.random.default_rng(11)
    perm = rng.permutation(len(vertices3))
    again = enumerate_facets(vertex_matrix(vertices3)[perm])
    assert {f.witness for f in again} == {f.witness for f in facets3}


def test_thirteen_classes_match_table1(facets3, data_dir):
    classes, n_pos = facet_classes(facets3)
    assert n_pos == 9 and len(classes) == 13
    table = {symmetry.canonical_form(Witness(np.array(r["coefficients"]), r["classical_bound"]))
             for r in catalog(data_dir, "table1")}
    assert set(classes) == table


def test_table1_rows(vertices3, data_dir):
    for r in catalog(data_dir, "table1"):
        w = Witness(np.array(r["coefficients"]), r["classical_bound"])
        assert classical_max(w, vertices3) == r["classical_bound"]
        assert is_facet(w, vertices3) == (True, r["tight_vertices"])


def test_table2_rows(vertices4, data_dir):
    V = vertex_matrix(vertices4)
    for r in catalog(data_dir, "table2"):
        w = Witness(np.array(r["coefficients"]), r["classical_bound"])
        assert classical_max(w, vertices4) == r["classical_bound"]
        assert is_facet(w, vertices4) == (True, r["tight_vertices"])
        assert numpy_facet_oracle(w, V) == (True, r["tight_vertices"])


def test_degenerate_and_invalid(vertices3):
    assert is_facet(Witness(np.zeros((3, 3), dtype=int), 0), vertices3)[0] is False
    w = Witness(np.array([[-1, -1, 1], [1, 0, 1], [1, -1, -1]]), 1)
    assert is_facet(w, vertices3)[0] is False        # violated by some vertex
    assert is_facet(w.with_bound(3), vertices3) == (False, 0)


def test_zero_padded_322_witnesses(vertices4, data_dir):
    V = vertex_matrix(vertices4)
    for r in catalog(data_dir, "table1"):
        w = symmetry.zero_pad(Witness(np.array(r["coefficients"]), r["classical_bound"]), 4)
        assert classical_max(w, vertices4) == r["classical_bound"]
        assert is_facet(w, vertices4) == numpy_facet_oracle(w, V)


def test_exact_rank_helpers():
    M = np.array([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert exact_rank(M) == 2
    assert affine_rank(np.array([[0, 0], [1, 0], [0, 1]])) == 2
    assert affine_rank(np.array([[1, 1], [2, 2], [3, 3]])) == 1


def test_refuses_large_scenarios(vertices4):
    with pytest.raises(FacetEnumerationError, match="integer-coefficient scan"):
        enumerate_facets(vertices4)
