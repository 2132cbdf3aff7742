"""Facet enumeration (double description) and exact facet tests."""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import symmetry
from ..scenario import Witness
from .vertices import vertex_matrix

MAX_FACET_N = 3
_PRIME = 2147483647
_INT_LIMIT = 1 << 40


class FacetEnumerationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Facet:
    witness: Witness
    tight_vertices: tuple

    @property
    def n_tight(self):
        return len(self.tight_vertices)

    def to_dict(self):
        d = self.witness.to_dict()
        d["tight_vertices"] = self.n_tight
        return d


def _rank_mod_p(M, p=_PRIME):
    M = np.array(M, dtype=np.int64) % p
    rows, cols = M.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(M[rank:, c])[0]
        if len(nz) == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            M[[rank, piv]] = M[[piv, rank]]
        inv = pow(int(M[rank, c]), p - 2, p)
        M[rank] = (M[rank] * inv) % p
        below = M[rank + 1:, c].copy()
        nzb = np.nonzero(below)[0]
        if len(nzb):
            M[rank + 1 + nzb] = (M[rank + 1 + nzb] - (below[nzb, None] * M[rank]) % p) % p
        rank += 1
    return rank


def exact_rank(M):
    """Rank over the rationals (fraction-free Bareiss elimination on Python ints)."""
    rows = [[int(x) if not isinstance(x, Fraction) else x for x in r] for r in np.asarray(M).tolist()]
    if rows and any(isinstance(x, Fraction) for r in rows for x in r):
        dens = [x.denominator for r in rows for x in r if isinstance(x, Fraction)]
        lcm = 1
        for d in dens:
            lcm = lcm * d // math.gcd(lcm, d)
        rows = [[int(Fraction(x) * lcm) for x in r] for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank, prev = 0, 1
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        for i in range(rank + 1, len(rows)):
            ri = rows[i]
            rows[i] = [(pr[c] * ri[j] - ri[c] * pr[j]) // prev for j in range(ncols)]
        prev = pr[c]
        rank += 1
        if rank == len(rows):
            break
    return rank


def affine_rank(points):
    """Exact affine rank of a set of rational points (rows)."""
    P = np.asarray(points)
    if len(P) <= 1:
        return 0
    D = P[1:] - P[0]
    if np.issubdtype(D.dtype, np.integer):
        r = _rank_mod_p(D)
        # the modular rank never exceeds the rational one
        if r == min(D.shape):
            return r
    return exact_rank(D)


def _as_exact(coeffs):
    flat = np.asarray(coeffs).ravel()
    if np.issubdtype(flat.dtype, np.integer):
        return flat.astype(np.int64)
    return np.array([Fraction(x) for x in flat.tolist()], dtype=object)


def tight_vertices(w, vertices):
    V = vertex_matrix(vertices)
    vals = V.dot(_as_exact(w.coefficients))
    return tuple(np.nonzero(vals == w.classical_bound)[0].tolist()), vals


def is_facet(w, vertices):
    """(facet-defining?, number of tight vertices) in exact arithmetic."""
    if w.classical_bound is None:
        raise ValueError("witness needs a classical bound")
    V = vertex_matrix(vertices)
    bound = w.classical_bound if not isinstance(w.classical_bound, float) else Fraction(w.classical_bound)
    tight, vals = tight_vertices(w.with_bound(bound), V)
    if any(v > bound for v in vals.tolist()):
        return False, len(tight)
    dim = V.shape[1]
    if not np.any(np.asarray(w.coefficients) != 0):
        return False, len(tight)
    if len(tight) < dim:
        return False, len(tight)
    # a nonzero W keeps every tight vertex on one hyperplane, so rank <= dim - 1
    pts = V[list(tight)]
    D = pts[1:] - pts[0]
    if _rank_mod_p(D) == dim - 1:
        return True, len(tight)
    return exact_rank(D) == dim - 1, len(tight)


def _normalize_int(v):
    g = np.gcd.reduce(np.abs(v))
    return v // g if g > 1 else v


def _initial_rays(A):
    """Pick d independent rows and return (row indices, integer rays of that simplicial cone)."""
    m, d = A.shape
    chosen = []
    for i in range(m):
        if _rank_mod_p(A[chosen + [i]]) == len(chosen) + 1 and exact_rank(A[chosen + [i]]) == len(chosen) + 1:
            chosen.append(i)
            if len(chosen) == d:
                break
    if len(chosen) < d:
        raise FacetEnumerationError("vertex set is not full-dimensional")
    K = [[Fraction(int(x)) for x in row] for row in A[chosen]]
    # exact inverse by Gauss-Jordan
    aug = [K[i] + [Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for c in range(d):
        piv = next(i for i in range(c, d) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(d):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    inv = [row[d:] for row in aug]
    rays = []
    for j in range(d):
        col = [inv[i][j] for i in range(d)]
        lcm = 1
        for x in col:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        rays.append(_normalize_int(np.array([int(x * lcm) for x in col], dtype=np.int64)))
    return chosen, np.array(rays, dtype=np.int64)


def _double_description(A):
    """Extreme rays of the pointed cone {h : A h >= 0} for an integer matrix A."""
    m, d = A.shape
    chosen, R = _initial_rays(A)
    order = chosen + [i for i in range(m) if i not in set(chosen)]
    processed = np.zeros(m, dtype=bool)
    processed[chosen] = True
    Z = (R @ A.T == 0) & processed[None, :]
    for row in order[d:]:
        a = A[row]
        s = R @ a
        pos = np.nonzero(s > 0)[0]
        neg = np.nonzero(s < 0)[0]
        zer = np.nonzero(s == 0)[0]
        new_rays, new_z = [], []
        if len(pos) and len(neg):
            Zf = Z.astype(np.float32)
            common = Zf[pos] @ Zf[neg].T
            pi, ni = np.nonzero(common >= d - 2)
            if len(pi):
                ip, jn = pos[pi], neg[ni]
                S = Z[ip] & Z[jn]
                sizes = S.sum(axis=1)
                # number of current rays whose zero set contains S; adjacency iff exactly 2
                step = max(1, 2_000_000 // max(1, len(R)))
                keep = np.zeros(len(ip), dtype=bool)
                for lo in range(0, len(ip), step):
                    cont = S[lo:lo + step].astype(np.float32) @ Zf.T
                    keep[lo:lo + step] = (cont == sizes[lo:lo + step, None]).sum(axis=1) == 2
                ip, jn, S = ip[keep], jn[keep], S[keep]
                if len(ip):
                    rays = s[ip][:, None] * R[jn] - s[jn][:, None] * R[ip]
                    if np.abs(rays).max() > _INT_LIMIT:
                        raise FacetEnumerationError("integer growth exceeded the safe range")
                    g = np.gcd.reduce(np.abs(rays), axis=1)
                    rays //= g[:, None]
                    new_rays.append(rays)
                    S[:, row] = True
                    new_z.append(S)
        keep_idx = np.concatenate([pos, zer])
        Zk = Z[keep_idx].copy()
        Zk[np.isin(keep_idx, zer), row] = True
        R = np.vstack([R[keep_idx]] + new_rays) if new_rays else R[keep_idx]
        Z = np.vstack([Zk] + new_z) if new_z else Zk
        processed[row] = True
    return R


def enumerate_facets(vertices):
    """Complete irredundant H-representation of conv(vertices).

    Returns facets as integer witnesses ``<W,P> <= bound`` with coprime
    coefficients, sorted by (coefficients, bound).
    """
    V = vertex_matrix(vertices)
    if len(V) == 0:
        raise FacetEnumerationError("empty vertex list")
    n = int(round(math.sqrt(V.shape[1])))
    if n > MAX_FACET_N:
        raise FacetEnumerationError(
            f"exact facet enumeration is limited to N<={MAX_FACET_N}; the N={n} polytope is too "
            "large for the double description method, use the integer-coefficient scan instead")
    A = np.hstack([np.ones((len(V), 1), dtype=np.int64), V])
    R = _double_description(A)
    facets = []
    for h in R:
        coeffs = (-h[1:]).reshape(n, n)
        w = Witness(coeffs, int(h[0]))
        tight = tuple(np.nonzero(V @ (-h[1:]) == h[0])[0].tolist())
        facets.append(Facet(w, tight))
    facets.sort(key=lambda f: tuple(f.witness.coefficients.ravel().tolist()) + (f.witness.classical_bound,))
    return facets


def is_positivity_facet(facet):
    w = facet.witness.coefficients.ravel()
    return facet.witness.classical_bound == 0 and np.count_nonzero(w) == 1 and w[np.nonzero(w)[0][0]] < 0


def facet_classes(facets):
    """Symmetry classes of the non-positivity facets.

    Returns (classes, n_positivity): classes maps each canonical witness to
    its member count. Facets equivalent to positivity (e.g. P[x,y] <= 1,
    the image of -P[x,y] <= 0 under outcome relabeling) are left out.
    """
    positivity = [f for f in facets if is_positivity_facet(f)]
    trivial = {symmetry.canonical_form(f.witness) for f in positivity}
    classes = {}
    for f in facets:
        if is_positivity_facet(f):
            continue
        c = symmetry.canonical_form(f.witness)
        if c in trivial:
            continue
        classes[c] = classes.get(c, 0) + 1
    return classes, len(positivity)
