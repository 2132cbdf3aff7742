"""Equivalences of witnesses: input relabelings, party exchange, outcome flip.

An op acts on a coefficient matrix by pulling back indices,
``W'[x, y] = W[alice_perm[x], bob_perm[y]]``, then transposing when
``swap_parties`` is set, then negating when ``negate`` is set. Negation is
the outcome relabeling P -> 1 - P, so the bound moves to ``w_c - sum(W)``.
"""
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .scenario import Witness


@dataclass(frozen=True)
class SymmetryOp:
    alice_perm: tuple
    bob_perm: tuple
    swap_parties: bool = False
    negate: bool = False

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)), tuple(range(n)))

    @property
    def n(self):
        return len(self.alice_perm)

    def index_map(self):
        """Flat indices ``idx`` with ``apply(W).ravel() == +-W.ravel()[idx]``."""
        n = self.n
        a = np.asarray(self.alice_perm)
        b = np.asarray(self.bob_perm)
        idx = (a[:, None] * n + b[None, :])
        if self.swap_parties:
            idx = idx.T
        return idx.ravel()

    def compose(self, other):
        """The op equivalent to applying ``other`` first and then ``self``."""
        a1, b1 = self.alice_perm, self.bob_perm
        a2, b2 = other.alice_perm, other.bob_perm
        if other.swap_parties:
            a = tuple(a2[b1[x]] for x in range(self.n))
            b = tuple(b2[a1[x]] for x in range(self.n))
        else:
            a = tuple(a2[a1[x]] for x in range(self.n))
            b = tuple(b2[b1[x]] for x in range(self.n))
        return SymmetryOp(a, b, self.swap_parties != other.swap_parties, self.negate != other.negate)


def apply(op, w):
    coeffs = np.asarray(w.coefficients)
    out = coeffs.ravel()[op.index_map()].reshape(coeffs.shape)
    bound = w.classical_bound
    if op.negate:
        if bound is not None:
            bound = bound - coeffs.sum()
            bound = bound.item() if hasattr(bound, "item") else bound
        out = -out
    return Witness(out, bound, w.label)


def group_elements(n):
    perms = list(itertools.permutations(range(n)))
    return [SymmetryOp(a, b, s, g) for g in (False, True) for s in (False, True)
            for a in perms for b in perms]


def group_order(n):
    f = 1
    for k in range(2, n + 1):
        f *= k
    return 4 * f * f


@lru_cache(maxsize=None)
def permutation_indices(n):
    """Flat index maps for all non-negating ops, shape (2 (n!)^2, n*n)."""
    ops = [op for op in group_elements(n) if not op.negate]
    return np.array([op.index_map() for op in ops], dtype=np.int64)


def orbit(w):
    """All distinct images of ``w``, as a list of Witness."""
    seen = {}
    for op in group_elements(w.n):
        img = apply(op, w)
        seen.setdefault(img.key(), img)
    return list(seen.values())


def canonical_form(w):
    """Lexicographic minimum over the orbit of (flattened W, bound)."""
    coeffs = np.asarray(w.coefficients)
    n = coeffs.shape[0]
    idx = permutation_indices(n)
    flat = coeffs.ravel()
    imgs = flat[idx]
    total = coeffs.sum()
    if w.classical_bound is None:
        bounds = [None] * (2 * len(idx))
    else:
        nb = w.classical_bound - total
        nb = nb.item() if hasattr(nb, "item") else nb
        bounds = [w.classical_bound] * len(idx) + [nb] * len(idx)
    imgs = np.vstack([imgs, -imgs])
    # lexsort keys: last key is primary
    order = np.lexsort(imgs.T[::-1])
    first = imgs[order[0]]
    ties = [i for i in order if np.array_equal(imgs[i], first)]
    if bounds[0] is None:
        best = ties[0]
    else:
        best = min(ties, key=lambda i: bounds[i])
    out = imgs[best].reshape(coeffs.shape)
    return Witness(out, bounds[best], w.label)


def are_equivalent(w1, w2):
    return canonical_form(w1) == canonical_form(w2)


def zero_pad(w, n):
    """Embed a witness into a scenario with ``n`` inputs per party."""
    coeffs = np.zeros((n, n), dtype=np.asarray(w.coefficients).dtype)
    k = w.n
    coeffs[:k, :k] = w.coefficients
    return Witness(coeffs, w.classical_bound, w.label)


# base-3 codes for {-1,0,1} matrices: lexicographic order of the matrix
# equals numeric order of sum (w_k + 1) * 3**(n*n - 1 - k)

@lru_cache(maxsize=None)
def _code_matrix(n):
    """Float matrix P with (digits @ P)[:, g] = code of the g-th permuted image."""
    idx = permutation_indices(n)
    m = n * n
    powers = 3.0 ** np.arange(m - 1, -1, -1)
    P = np.zeros((m, len(idx)))
    for g, perm in enumerate(idx):
        # image[k] = digits[perm[k]] contributes digits[perm[k]] * powers[k]
        P[perm, g] = powers
    return P, powers


def ternary_codes_canonical(digits):
    """For rows of digits in {0,1,2} (coefficient + 1), flag canonical representatives.

    Negated images have digits 2 - d, so their codes are 2*sum(powers) - code.
    """
    n = int(round(np.sqrt(digits.shape[1])))
    P, powers = _code_matrix(n)
    d = digits.astype(np.float64)
    own = d @ powers
    codes = d @ P
    top = 2.0 * powers.sum()
    best = np.minimum(codes.min(axis=1), top - codes.max(axis=1))
    return own == best
