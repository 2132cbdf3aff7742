"""Two-qubit linear algebra: tensor products, partial transpose/trace, negativity.

Operators are plain complex numpy arrays. Composite indices follow the
row-major pairing ``i = i1 * d2 + i2``; the partial transpose acts on the
second factor.
"""
import numpy as np

HERMITIAN_ATOL = 1e-12


class DimensionError(ValueError):
    pass


def _check_dim4(m):
    m = np.asarray(m)
    if m.shape[-2:] != (4, 4):
        raise DimensionError(f"expected a 4x4 operator, got shape {m.shape}")
    return m


def is_hermitian(h, atol=HERMITIAN_ATOL):
    h = np.asarray(h)
    return h.ndim >= 2 and h.shape[-1] == h.shape[-2] and np.allclose(
        h, np.swapaxes(h, -1, -2).conj(), rtol=0, atol=atol)


def hermitize(h):
    h = np.asarray(h, dtype=complex)
    return 0.5 * (h + np.swapaxes(h, -1, -2).conj())


def tensor_product(a, b):
    """Kronecker product with entry((i1,i2),(j1,j2)) = a[i1,j1] * b[i2,j2].

    Works on stacks of matrices (leading batch axes must broadcast).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    d1, d2 = a.shape[-1], b.shape[-1]
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(out.shape[:-4] + (d1 * d2, d1 * d2))


def partial_transpose(m):
    """Transpose on the second qubit of a (stack of) 4x4 operator(s)."""
    m = _check_dim4(m)
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    return np.swapaxes(t, -3, -1).reshape(m.shape)


def partial_trace_second(m):
    m = _check_dim4(m)
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    return np.einsum("...ikjk->...ij", t)


def partial_trace_first(m):
    m = _check_dim4(m)
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    return np.einsum("...kikj->...ij", t)


def max_eigenpair(h):
    """Largest eigenvalue and a unit eigenvector of a Hermitian matrix (stackable)."""
    w, v = np.linalg.eigh(hermitize(h))
    return w[..., -1], v[..., :, -1]


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return psi[..., :, None] * psi[..., None, :].conj()


def normalize(psi):
    psi = np.asarray(psi, dtype=complex)
    return psi / np.linalg.norm(psi, axis=-1, keepdims=True)


def pt_eigenvalues(m):
    return np.linalg.eigvalsh(hermitize(partial_transpose(m)))


def negativity(m):
    """Sum of |negative eigenvalues| of the partial transpose."""
    w = pt_eigenvalues(m)
    return -np.sum(np.minimum(w, 0.0), axis=-1)


def density_matrix_mask(rho, atol=1e-9):
    """Elementwise validity flags for a stack of density matrices."""
    rho = np.asarray(rho, dtype=complex)
    herm = np.all(np.abs(rho - np.swapaxes(rho, -1, -2).conj()) <= atol, axis=(-1, -2))
    unit = np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1) <= atol
    psd = np.linalg.eigvalsh(hermitize(rho))[..., 0] >= -atol
    return herm & unit & psd


def is_density_matrix(rho, atol=1e-9):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    return bool(density_matrix_mask(rho, atol))


def is_povm_element(m, atol=1e-9):
    m = np.asarray(m)
    if not is_hermitian(m, atol=atol):
        return False
    w = np.linalg.eigvalsh(hermitize(m))
    return w[0] >= -atol and w[-1] <= 1 + atol


def random_pure_states(rng, n, d=2):
    """Haar-random unit vectors, shape (n, d)."""
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return normalize(z)


def random_hermitian(rng, d, size=None):
    shape = (d, d) if size is None else (size, d, d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return hermitize(z)


KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_PLUS_I = np.array([1, 1j], dtype=complex) / np.sqrt(2)
PSI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
