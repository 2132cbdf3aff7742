"""max tr(MF) over 4x4 Hermitian M with 0 <= M <= I and 0 <= PT(M) <= I.

Log-barrier interior point method on the 16 real coordinates of M. All four
4x4 matrix inequalities enter the barrier, so the barrier parameter is 16
and a centred iterate at barrier weight t is within 16/t of optimal. The
solver is vectorized over a leading batch axis so many independent
problems advance in lockstep.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import qcore

log = logging.getLogger(__name__)

BARRIER_PARAMETER = 16.0


class SdpConvergenceError(RuntimeError):
    def __init__(self, message, best_m=None, residual=None):
        super().__init__(message)
        self.best_m = best_m
        self.residual = residual


@dataclass(frozen=True)
class PptProblem:
    objective: np.ndarray
    tolerance: float = 1e-8
    max_iterations: int = 500

    def __post_init__(self):
        f = np.asarray(self.objective)
        if f.shape != (4, 4) or not qcore.is_hermitian(f, atol=1e-10):
            raise ValueError("objective must be a 4x4 Hermitian matrix")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class SdpSolution:
    m: np.ndarray
    value: float
    duality_gap_or_residual: float
    iterations: int


@lru_cache(maxsize=None)
def hermitian_basis():
    """Orthonormal (Hilbert-Schmidt) basis of 4x4 Hermitian matrices, shape (16, 4, 4)."""
    out = []
    for i in range(4):
        e = np.zeros((4, 4), dtype=complex)
        e[i, i] = 1
        out.append(e)
    for i in range(4):
        for j in range(i + 1, 4):
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = -1j / np.sqrt(2)
            e[j, i] = 1j / np.sqrt(2)
            out.append(e)
    basis = np.array(out)
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=None)
def _constraint_maps():
    """(A, C): X_i(x) = C_i + sum_k x_k A[i, k] for the four inequalities."""
    b = hermitian_basis()
    ptb = qcore.partial_transpose(b)
    A = np.stack([b, -b, ptb, -ptb])
    eye = np.eye(4, dtype=complex)
    zero = np.zeros((4, 4), dtype=complex)
    C = np.stack([zero, eye, zero, eye])
    A.setflags(write=False)
    C.setflags(write=False)
    return A, C


def coords(m):
    """Real coordinates of Hermitian matrices in ``hermitian_basis``."""
    return np.einsum("kij,...ji->...k", hermitian_basis(), m).real


def from_coords(x):
    return np.einsum("...k,kij->...ij", x, hermitian_basis())


def _slacks(x):
    A, C = _constraint_maps()
    flat = A.reshape(4, 16, 16).transpose(1, 0, 2).reshape(16, 64)
    return C[None] + (x.astype(complex) @ flat).reshape(-1, 4, 4, 4)


def _is_interior(X):
    """Positive definiteness of every slack, shape (B,)."""
    try:
        np.linalg.cholesky(X)
        return np.ones(X.shape[0], dtype=bool)
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(X)
        return np.all(w[..., 0] > 0, axis=-1)


@lru_cache(maxsize=None)
def _vec_maps():
    """Columns vec(B_k) and vec(PT(B_k)) (row-major vec), each (16, 16)."""
    b = hermitian_basis()
    bmat = b.reshape(16, 16).T.copy()
    pmat = qcore.partial_transpose(b).reshape(16, 16).T.copy()
    return bmat, pmat


def _kron_pair(Y):
    """Y (x) Y^T for a stack of 4x4 matrices, as (..., 16, 16)."""
    k = Y[..., :, None, :, None] * np.swapaxes(Y, -1, -2)[..., None, :, None, :]
    return k.reshape(Y.shape[:-2] + (16, 16))


def _newton(x, c, t):
    """Newton direction for minimizing -t c.x - sum log det X_i; returns (dx, decrement^2).

    With vec(Y A Y) = (Y (x) Y^T) vec(A), the barrier Hessian is
    Bmat^H (K1 + K2) Bmat + Pmat^H (K3 + K4) Pmat.
    """
    nb = x.shape[0]
    bmat, pmat = _vec_maps()
    Y = np.linalg.inv(_slacks(x))                                     # (B, 4, 4, 4)
    yv = Y.reshape(nb, 4, 16)
    trace = (yv[:, 0] - yv[:, 1]) @ bmat.conj() + (yv[:, 2] - yv[:, 3]) @ pmat.conj()
    grad = -t[:, None] * c - trace.real
    K = _kron_pair(Y)
    H = (bmat.conj().T @ (K[:, 0] + K[:, 1]) @ bmat + pmat.conj().T @ (K[:, 2] + K[:, 3]) @ pmat).real
    # Jacobi scaling keeps the solve stable when slacks differ by many orders of magnitude
    d = 1.0 / np.sqrt(np.maximum(np.einsum("bkk->bk", H), 1e-300))
    Hs = H * d[:, :, None] * d[:, None, :]
    gs = grad * d
    try:
        dxs = -np.linalg.solve(Hs, gs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        dxs = -np.einsum("bkl,bl->bk", np.linalg.pinv(Hs, hermitian=True), gs)
    dx = dxs * d
    dec2 = -np.einsum("bk,bk->b", grad, dx)
    return dx, np.maximum(dec2, 0.0)


def _barrier(x, c, t):
    X = _slacks(x)
    try:
        diag = np.einsum("...ii->...i", np.linalg.cholesky(X)).real
        logdet = 2.0 * np.sum(np.log(diag), axis=(-1, -2))
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(X)
        inside = np.all(w[..., 0] > 0, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            logdet = np.where(inside, np.sum(np.log(np.where(w > 0, w, 1.0)), axis=(-1, -2)), -np.inf)
    return -t * np.einsum("bk,bk->b", c, x) - logdet


def solve_ppt_batch(f, tolerance=1e-8, max_iterations=500, mu=20.0, center_tol=1e-9, path_tol=1e-2):
    """Solve a stack of PPT problems; returns (M, values, gaps, iterations, converged).

    Centring is loose (decrement^2 < path_tol) along the path and tight
    (< center_tol) at the final barrier weight, where the reported gap
    bound 16/t applies.
    """
    f = qcore.hermitize(np.asarray(f, dtype=complex))
    single = f.ndim == 2
    if single:
        f = f[None]
    nb = f.shape[0]
    c = coords(f)
    scale = np.maximum(np.abs(np.linalg.eigvalsh(f)).max(axis=-1), 1e-12)
    t_final = BARRIER_PARAMETER / (tolerance * scale)
    x = coords(np.broadcast_to(np.eye(4, dtype=complex) / 2, f.shape))
    t = 1.0 / scale
    iterations = 0
    converged = np.zeros(nb, dtype=bool)
    while iterations < max_iterations:
        dx, dec2 = _newton(x, c, t)
        iterations += 1
        final = t >= t_final
        centred = dec2 < np.where(final, center_tol, path_tol)
        converged |= centred & final
        if converged.all():
            break
        # full Newton steps in the quadratic region, backtracking on the barrier otherwise
        f0 = _barrier(x, c, t)
        quad = dec2 < 0.1
        step = np.ones(nb)
        ok = np.zeros(nb, dtype=bool)
        todo = np.nonzero(~converged)[0]
        for _ in range(40):
            trial = x[todo] + step[todo, None] * dx[todo]
            ft = _barrier(trial, c[todo], t[todo])
            good = np.isfinite(ft) & (quad[todo] | (ft <= f0[todo] - 0.25 * step[todo] * dec2[todo]))
            x[todo[good]] = trial[good]
            ok[todo[good]] = True
            todo = todo[~good]
            if len(todo) == 0:
                break
            step[todo] *= 0.5
        t = np.where(centred & ~final, np.minimum(t * mu, t_final), t)
    m = qcore.hermitize(from_coords(x))
    values = np.einsum("bij,bji->b", m, f).real
    gaps = BARRIER_PARAMETER / t
    if single:
        return m[0], values[0], gaps[0], iterations, bool(converged[0])
    return m, values, gaps, iterations, converged


def solve_ppt(problem):
    """Solve one PPT-constrained problem, raising on non-convergence."""
    m, value, gap, iters, ok = solve_ppt_batch(problem.objective, problem.tolerance,
                                               problem.max_iterations)
    if not ok:
        raise SdpConvergenceError(f"barrier method did not converge in {iters} Newton steps",
                                  best_m=m, residual=gap)
    m = polish(m, problem.objective)
    value = np.trace(m @ problem.objective).real
    return SdpSolution(m=m, value=float(value), duality_gap_or_residual=float(gap), iterations=iters)


def solve_unconstrained_entangled(f):
    """max tr(MF) subject only to 0 <= M <= I: project onto the nonnegative eigenspace.

    Eigenvalues within 1e-12 of zero are kept, matching (sgn(l)+1)/2 with sgn(0)=+1.
    Works on stacks of matrices.
    """
    w, v = np.linalg.eigh(qcore.hermitize(f))
    keep = (w >= -1e-12).astype(float)
    m = np.einsum("...ik,...k,...jk->...ij", v, keep, v.conj())
    value = np.sum(np.maximum(w, 0.0), axis=-1)
    return qcore.hermitize(m), value


def polish(m, f, snap=1e-6, feas_tol=1e-12):
    """Round eigenvalues within ``snap`` of 0 or 1 when that keeps M feasible and not worse."""
    w, v = np.linalg.eigh(qcore.hermitize(m))
    w2 = np.where(np.abs(w) < snap, 0.0, np.where(np.abs(w - 1) < snap, 1.0, w))
    if np.array_equal(w, w2):
        return m
    m2 = qcore.hermitize((v * w2) @ v.conj().T)
    pw = qcore.pt_eigenvalues(m2)
    if pw[0] < -feas_tol or pw[-1] > 1 + feas_tol:
        return m
    if np.trace(m2 @ f).real < np.trace(m @ f).real - feas_tol:
        return m
    return m2
