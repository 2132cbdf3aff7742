"""Small dense linear programs with exact rational certificates.

The solver runs a two-phase tableau simplex in floating point to find a
candidate basis, then re-derives primal values and duals for that basis
in exact rational arithmetic. If the exact check fails (degeneracy,
rounding), the same tableau simplex is rerun over ``Fraction`` entries.

Problems are in standard form::

    minimize c @ x   subject to   A @ x == b,  x >= 0
"""
from dataclasses import dataclass
import math
from fractions import Fraction

import numpy as np

FLOAT_EPS = 1e-9


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str                     # "optimal" | "infeasible" | "unbounded"
    x: list | None = None           # exact primal solution (Fractions)
    value: Fraction | None = None   # exact objective
    dual: list | None = None        # exact duals y (A^T y <= c at optimum)
    farkas: list | None = None      # y with y @ A <= 0, y @ b > 0 when infeasible
    basis: list | None = None
    exact_fallback: bool = False


def _to_fraction_array(a):
    a = np.asarray(a)
    out = np.empty(a.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(a.reshape(-1).tolist()):
        flat[i] = v if isinstance(v, Fraction) else Fraction(v)
    return out


def _pivot(T, r, j):
    T[r] = T[r] / T[r, j]
    col = T[:, j].copy()
    col[r] = 0
    nz = np.nonzero(col)[0]
    for i in nz:
        T[i] = T[i] - col[i] * T[r]


def _run_tableau(T, basis, allowed, eps, max_pivots=100000):
    """Minimize over the last row of T (reduced costs, objective in T[-1,-1] negated).

    Bland's rule; ``allowed`` masks the columns that may enter.
    Returns "optimal" or "unbounded".
    """
    m = T.shape[0] - 1
    for _ in range(max_pivots):
        red = T[-1, :-1]
        enter = None
        for j in np.nonzero(allowed)[0]:
            if red[j] < -eps:
                enter = j
                break
        if enter is None:
            return "optimal"
        col = T[:m, enter]
        best = None
        for i in range(m):
            if col[i] > eps:
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        r = best[1]
        _pivot(T, r, enter)
        basis[r] = enter
    raise LPError("simplex pivot limit exceeded")


def _tableau_solve(c, A, b, exact):
    """Two-phase tableau simplex. Returns (status, basis) with columns >= n artificial."""
    m, n = A.shape
    if exact:
        A = _to_fraction_array(A)
        b = _to_fraction_array(b)
        c = _to_fraction_array(c)
        zero, one, eps = Fraction(0), Fraction(1), 0
        T = np.empty((m + 1, n + m + 1), dtype=object)
        T[:] = zero
    else:
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        c = np.asarray(c, dtype=float)
        zero, one, eps = 0.0, 1.0, FLOAT_EPS
        T = np.zeros((m + 1, n + m + 1))
    for i in range(m):
        T[i, :n] = A[i]
        T[i, n + i] = one
        T[i, -1] = b[i]
    basis = list(range(n, n + m))
    # phase I: minimize the sum of artificials
    T[-1, :] = zero
    for i in range(m):
        T[-1, :n] = T[-1, :n] - T[i, :n]
        T[-1, -1] = T[-1, -1] - T[i, -1]
    allowed = np.zeros(n + m, dtype=bool)
    allowed[:n] = True
    _run_tableau(T, basis, allowed, eps)
    phase1 = -T[-1, -1]
    if phase1 > eps:
        return "infeasible", basis
    # drive zero-level artificials out where possible
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > eps and j not in basis:
                    _pivot(T, i, j)
                    basis[i] = j
                    break
    # phase II
    T[-1, :] = zero
    T[-1, :n] = c
    for i in range(m):
        cb = c[basis[i]] if basis[i] < n else zero
        if cb != 0:
            T[-1] = T[-1] - cb * T[i]
    status = _run_tableau(T, basis, allowed, eps)
    return status, basis


def _solve_exact(B, rhs):
    """Solve B x = rhs exactly (B: list of rows of Fractions); None if singular.

    Everything is scaled to integers and eliminated fraction-free (Bareiss),
    so only the back substitution touches Fractions.
    """
    m = len(B)
    den = 1
    for v in [v for row in B for v in row] + list(rhs):
        den = den * v.denominator // math.gcd(den, v.denominator)
    M = [[int(v * den) for v in row] + [int(r * den)] for row, r in zip(B, rhs)]
    prev = 1
    for k in range(m):
        piv = next((i for i in range(k, m) if M[i][k] != 0), None)
        if piv is None:
            return None
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
        pk = M[k]
        for i in range(k + 1, m):
            row = M[i]
            a = row[k]
            for j in range(k + 1, m + 1):
                row[j] = (pk[k] * row[j] - a * pk[j]) // prev
            row[k] = 0
        prev = pk[k]
    x = [Fraction(0)] * m
    for i in range(m - 1, -1, -1):
        acc = Fraction(M[i][m])
        for j in range(i + 1, m):
            if M[i][j]:
                acc -= M[i][j] * x[j]
        x[i] = acc / M[i][i]
    return x


def _reduced_costs(cost, y, A):
    """cost - y @ A, exactly. Integer A is handled with a common denominator."""
    A = np.asarray(A)
    if np.issubdtype(A.dtype, np.integer):
        den = 1
        for v in y:
            den = den * v.denominator // math.gcd(den, v.denominator)
        yi = np.array([int(v * den) for v in y], dtype=object)
        s = yi.dot(A.astype(object))
        return [cj - Fraction(int(sj), den) for cj, sj in zip(cost, s)]
    return list(np.array(cost, dtype=object) - y.dot(_to_fraction_array(A)))


def _certify(c, A, b, basis, phase1):
    """Exact primal/dual values for ``basis``; None if the basis is not optimal."""
    m, n = A.shape
    bq = _to_fraction_array(b)
    cols = []
    for j in basis:
        if j < n:
            cols.append([Fraction(v) for v in np.asarray(A[:, j]).tolist()])
        else:
            e = [Fraction(0)] * m
            e[j - n] = Fraction(1)
            cols.append(e)
    B = [[cols[k][i] for k in range(m)] for i in range(m)]
    xb = _solve_exact(B, list(bq))
    if xb is None:
        return None
    if any(v < 0 for v in xb):
        return None
    if phase1:
        cost = [Fraction(0)] * n + [Fraction(1)] * m
    else:
        cq = _to_fraction_array(c)
        cost = list(cq) + [Fraction(0)] * m
        # artificials must sit at exactly zero
        if any(basis[i] >= n and xb[i] != 0 for i in range(m)):
            return None
    cb = np.array([cost[j] for j in basis], dtype=object)
    y = np.array(_solve_exact(cols, list(cb)), dtype=object)
    red = _reduced_costs(cost[:n], y, A)
    if any(r < 0 for r in red):
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = xb[i]
    value = sum((cb[i] * xb[i] for i in range(m)), Fraction(0))
    return x, value, list(y)


def solve(c, A, b):
    """Exactly solve ``min c@x, A@x == b, x >= 0`` (rational data)."""
    A = np.asarray(A)
    b = list(np.asarray(b).tolist())
    m, n = A.shape
    # rows with b < 0 are negated so the artificial basis starts feasible
    sign = [-1 if bi < 0 else 1 for bi in b]
    A = A * np.asarray(sign)[:, None]
    b = [s * bi for s, bi in zip(sign, b)]
    status, basis = _tableau_solve(c, A, b, exact=False)
    if status == "unbounded":
        # confirm exactly; unboundedness is rare for the problems in this package
        status, basis = _tableau_solve(c, A, b, exact=True)
        if status == "unbounded":
            return LPResult("unbounded", exact_fallback=True)
    fallback = False
    if status == "infeasible":
        cert = _certify(c, A, b, basis, phase1=True)
        if cert is None or cert[1] == 0:
            fallback = True
            status, basis = _tableau_solve(c, A, b, exact=True)
            if status == "infeasible":
                cert = _certify(c, A, b, basis, phase1=True)
    if status == "infeasible":
        # phase-I duals: y@A <= 0 and y@b == phase-I optimum > 0
        y = [s * v for s, v in zip(sign, cert[2])]
        return LPResult("infeasible", farkas=y, basis=basis, exact_fallback=fallback)
    cert = _certify(c, A, b, basis, phase1=False)
    if cert is None:
        fallback = True
        status, basis = _tableau_solve(c, A, b, exact=True)
        if status == "unbounded":
            return LPResult("unbounded", exact_fallback=True)
        if status == "infeasible":
            # rounding made the float phase I accept a point the exact data excludes
            cert = _certify(c, A, b, basis, phase1=True)
            y = [s * v for s, v in zip(sign, cert[2])]
            return LPResult("infeasible", farkas=y, basis=basis, exact_fallback=True)
        cert = _certify(c, A, b, basis, phase1=False)
        if cert is None:
            raise LPError("could not certify the exact optimal basis")
    x, value, y = cert
    y = [s * v for s, v in zip(sign, y)]
    return LPResult("optimal", x=x, value=value, dual=y, basis=basis, exact_fallback=fallback)
