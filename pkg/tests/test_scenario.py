import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entmeas import qcore
from entmeas.scenario import (Scenario, UnsupportedScenarioError, ValidationError, Witness,
                              evaluate_probabilities, load_table, load_witness, save_table,
                              save_witness, table_from_dict, witness_value)


def brute_table(rho, sigma, m):
    return np.array([[np.trace(np.kron(r, s) @ m).real for s in sigma] for r in rho])


def test_scenario_validation():
    assert Scenario(3).name == "322"
    with pytest.raises(UnsupportedScenarioError):
        Scenario(3, dim=3)
    with pytest.raises(UnsupportedScenarioError):
        Scenario(3, n_outcomes=3)
    with pytest.raises(UnsupportedScenarioError):
        Scenario(7)
    with pytest.warns(UserWarning):
        Scenario(2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_probabilities_match_trace_formula(seed, n):
    rng = np.random.default_rng(seed)
    rho = qcore.projector(qcore.random_pure_states(rng, n))
    sigma = qcore.projector(qcore.random_pure_states(rng, n))
    w, v = np.linalg.eigh(qcore.random_hermitian(rng, 4))
    m = (v * rng.random(4)) @ v.conj().T
    p = evaluate_probabilities(rho, sigma, m)
    assert np.allclose(p, brute_table(rho, sigma, m), atol=1e-12)
    assert np.all(p >= -1e-12) and np.all(p <= 1 + 1e-12)


def test_bell_example_table():
    rho = qcore.projector(np.array([qcore.KET0, qcore.KET_PLUS, qcore.KET_PLUS_I]))
    sigma = qcore.projector(np.array([qcore.KET1, qcore.KET_MINUS, qcore.KET_PLUS_I]))
    p = evaluate_probabilities(rho, sigma, qcore.projector(qcore.PSI_PLUS))
    expected = np.full((3, 3), 0.25)
    np.fill_diagonal(expected, 0)
    assert np.allclose(p, expected, atol=1e-15)


def test_validation_names_bad_state():
    rho = qcore.projector(np.array([qcore.KET0, qcore.KET1]))
    bad = rho.copy()
    bad[1] *= 2
    with pytest.raises(ValidationError, match=r"sigma\[1\]"):
        evaluate_probabilities(rho, bad, np.eye(4))
    with pytest.raises(ValidationError, match="0 <= M <= I"):
        evaluate_probabilities(rho, rho, 2 * np.eye(4))


def test_witness_value_and_shapes():
    w = Witness(np.array([[1, -1], [0, 2]]), 2)
    assert witness_value(w, np.array([[1.0, 0.5], [0.3, 0.25]])) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        witness_value(w, np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        Witness(np.zeros((2, 3)))


def test_witness_integer_storage_and_equality():
    w = Witness(np.array([[1.0, 2.0], [0.0, -1.0]]), 3.0)
    assert w.is_integer and isinstance(w.classical_bound, int)
    assert w == Witness(np.array([[1, 2], [0, -1]]), 3)
    assert len({w, Witness(np.array([[1, 2], [0, -1]]), 3)}) == 1
    with pytest.raises(ValueError):
        w.coefficients[0, 0] = 5


def test_witness_and_table_files(tmp_path):
    w = Witness(np.array([[-1, -1, 1], [1, 0, 1], [1, -1, -1]]), 2)
    save_witness(w, tmp_path / "w.json")
    assert load_witness(tmp_path / "w.json") == w
    p = np.array([[0.1, 0.2], [0.3, 0.4]])
    save_table(p, tmp_path / "p.json")
    assert np.array_equal(load_table(tmp_path / "p.json"), p)


def test_malformed_records():
    with pytest.raises(ValidationError):
        Witness.from_dict({"n": 3, "coefficients": [[1, 2], [3, 4]]})
    with pytest.raises(ValidationError):
        table_from_dict({"entries": [[0.5]]})
    with pytest.raises(ValidationError):
        table_from_dict({"n": 1, "entries": [[1.5]]})


def test_shipped_witness_file(data_dir):
    w = load_witness(data_dir / "wit322.json")
    assert w.n == 3 and w.classical_bound == 2
    assert json.loads((data_dir / "wit322.json").read_text())["coefficients"] == w.coefficients.tolist()
