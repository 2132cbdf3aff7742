import cvxpy as cp
import numpy as np
import pytest

from entmeas import qcore, sdp


def cvxpy_ppt(f):
    m = cp.Variable((4, 4), hermitian=True)
    pt = cp.partial_transpose(m, [2, 2], 1)
    cons = [m >> 0, np.eye(4) - m >> 0, pt >> 0, np.eye(4) - pt >> 0]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(m @ f))), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def assert_feasible(m, tol=1e-9):
    w = np.linalg.eigvalsh(m)
    pw = qcore.pt_eigenvalues(m)
    assert w[0] >= -tol and w[-1] <= 1 + tol
    assert pw[0] >= -tol and pw[-1] <= 1 + tol


def random_objectives(seed, k):
    return qcore.random_hermitian(np.random.default_rng(seed), 4, size=k)


def test_matches_cvxpy():
    fs = random_objectives(1, 30)
    m, values, gaps, _, ok = sdp.solve_ppt_batch(fs, tolerance=1e-9)
    assert ok.all()
    for f, mi, v in zip(fs, m, values):
        assert v == pytest.approx(cvxpy_ppt(f), abs=1e-6)
        assert_feasible(mi)


def test_batch_equals_single():
    fs = random_objectives(2, 5)
    m, values, *_ = sdp.solve_ppt_batch(fs)
    for f, v in zip(fs, values):
        single = sdp.solve_ppt(sdp.PptProblem(f))
        assert single.value == pytest.approx(v, abs=1e-7)


def test_bounded_by_entangled_relaxation():
    fs = random_objectives(3, 50)
    _, values, *_ = sdp.solve_ppt_batch(fs)
    _, ent = sdp.solve_unconstrained_entangled(fs)
    assert np.all(values <= ent + 1e-9)
    assert np.allclose(ent, np.sum(np.maximum(np.linalg.eigvalsh(fs), 0), axis=-1))


def test_random_feasible_points_never_beat_solver():
    rng = np.random.default_rng(4)
    f = qcore.random_hermitian(rng, 4)
    best = sdp.solve_ppt(sdp.PptProblem(f)).value
    for _ in range(2000):
        # random product projector mixtures are separable, hence feasible
        k = rng.integers(1, 4)
        lam = rng.random(k)
        us, vs = qcore.random_pure_states(rng, k), qcore.random_pure_states(rng, k)
        m = sum(l * np.kron(qcore.projector(u), qcore.projector(v)) for l, u, v in zip(lam, us, vs))
        m = m / max(1.0, np.linalg.eigvalsh(m)[-1])
        assert np.trace(m @ f).real <= best + 1e-8


def test_corner_cases_exact():
    assert sdp.solve_ppt(sdp.PptProblem(np.eye(4, dtype=complex))).value == 4.0
    assert sdp.solve_ppt(sdp.PptProblem(-np.eye(4, dtype=complex))).value == 0.0
    sol = sdp.solve_ppt(sdp.PptProblem(np.zeros((4, 4), dtype=complex)))
    assert sol.value == pytest.approx(0.0, abs=1e-12)


def test_bell_objective_closed_form():
    # tr(M (2P - I)) = -2 tr(PT(M) P_singlet) <= 0 for PPT M, while M = P reaches 1
    f = 2 * qcore.projector(qcore.PSI_PLUS) - np.eye(4)
    sol = sdp.solve_ppt(sdp.PptProblem(f))
    assert sol.value == pytest.approx(0.0, abs=1e-7)
    assert sdp.solve_unconstrained_entangled(f)[1] == pytest.approx(1.0)
    # the Bell projector itself is reached by a separable element
    assert sdp.solve_ppt(sdp.PptProblem(qcore.projector(qcore.PSI_PLUS))).value == pytest.approx(1.0, abs=1e-7)


def test_nonconvergence_reports_best_iterate():
    with pytest.raises(sdp.SdpConvergenceError) as info:
        sdp.solve_ppt(sdp.PptProblem(random_objectives(5, 1)[0], max_iterations=3))
    assert info.value.best_m.shape == (4, 4)


def test_problem_validation():
    with pytest.raises(ValueError):
        sdp.PptProblem(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        sdp.PptProblem(np.array([[0, 1], [0, 0]] * 2 + [[0, 0]] * 2).reshape(4, 4) + 0j)
    with pytest.raises(ValueError):
        sdp.PptProblem(np.eye(4), tolerance=0)


def test_hermitian_basis_is_orthonormal():
    B = sdp.hermitian_basis()
    G = np.einsum("aij,bji->ab", B, B).real
    assert np.allclose(G, np.eye(16))
    m = qcore.random_hermitian(np.random.default_rng(6), 4)
    assert np.allclose(sdp.from_coords(sdp.coords(m)), m)


def test_polish_never_hurts():
    rng = np.random.default_rng(7)
    fs = qcore.random_hermitian(rng, 4, size=20)
    m, values, *_ = sdp.solve_ppt_batch(fs)
    for f, mi, v in zip(fs, m, values):
        p = sdp.polish(mi, f)
        assert np.trace(p @ f).real >= v - 1e-12
        assert_feasible(p, tol=1e-12)
