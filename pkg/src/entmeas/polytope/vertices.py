"""Deterministic classical strategies and the vertices of the classical polytope."""
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import lp
from ..scenario import Scenario, UnsupportedScenarioError, Witness, ValidationError


@dataclass(frozen=True, eq=False)
class StrategyVertex:
    alice_map: tuple
    bob_map: tuple
    charlie_map: tuple      # charlie_map[a][b] -> announced outcome
    table: np.ndarray       # int8 0/1 table, table[x, y] = [outcome == 0]

    @property
    def n(self):
        return self.table.shape[0]


def strategy_table(alice_map, bob_map, charlie_map):
    a = np.asarray(alice_map)
    b = np.asarray(bob_map)
    c = np.asarray(charlie_map)
    return (c[a[:, None], b[None, :]] == 0).astype(np.int8)


def _all_maps(n, d):
    return np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64).reshape(-1, n)


def _cube_certificate(point):
    """Exact extremality witness for a 0/1 point among other distinct 0/1 points.

    The functional 2v - 1 attains |v| at v and at most |v| - 1 at any other
    vertex of the unit cube.
    """
    v = np.asarray(point).ravel()
    if not np.all((v == 0) | (v == 1)):
        return None
    return 2 * v.astype(np.int64) - 1


def is_extreme(point, others):
    """True iff ``point`` is not a convex combination of ``others``."""
    others = np.asarray(others).reshape(len(others), -1)
    v = np.asarray(point).ravel()
    if len(others) == 0:
        return True
    cert = _cube_certificate(v)
    if cert is not None and np.all((others == 0) | (others == 1)):
        if np.any(np.all(others == v, axis=1)):
            return False
        return True
    return membership_lp(v, others).status == "infeasible"


def enumerate_vertices(scenario):
    """All extremal deterministic-strategy tables, deduplicated and sorted.

    Sort order is by the row-major bit string of the table (first entry most
    significant), which makes vertex indices reproducible.
    """
    if isinstance(scenario, int):
        scenario = Scenario(scenario)
    n, d, k = scenario.n_inputs, scenario.dim, scenario.n_outcomes
    if d != 2 or k != 2 or n > 6:
        raise UnsupportedScenarioError(f"vertex enumeration supports N<=6, D=K=2 only")
    amaps = _all_maps(n, d)
    cmaps = _all_maps(d * d, k).reshape(-1, d, d)
    # tables[c, a, b, x, y] = [charlie_c(alice_a(x), bob_b(y)) == 0]
    tables = cmaps[np.arange(len(cmaps))[:, None, None, None, None],
                   amaps[None, :, None, :, None],
                   amaps[None, None, :, None, :]] == 0
    flat = tables.reshape(-1, n * n).astype(np.int8)
    weights = (1 << np.arange(n * n - 1, -1, -1, dtype=np.int64))
    codes = flat.astype(np.int64) @ weights
    uniq, first = np.unique(codes, return_index=True)
    order = np.argsort(-uniq, kind="stable")  # descending code: all-ones table first
    n_a = len(amaps)
    out = []
    for idx in first[order]:
        ci, rest = divmod(int(idx), n_a * n_a)
        ai, bi = divmod(rest, n_a)
        table = flat[idx].reshape(n, n).copy()
        table.setflags(write=False)
        out.append(StrategyVertex(tuple(amaps[ai].tolist()), tuple(amaps[bi].tolist()),
                                  tuple(map(tuple, cmaps[ci].tolist())), table))
    tables = np.array([v.table.ravel() for v in out])
    keep = [i for i in range(len(out))
            if is_extreme(tables[i], np.delete(tables, i, axis=0))]
    return [out[i] for i in keep]


def vertex_matrix(vertices):
    """Stack vertex tables as an (n_vertices, N*N) int64 array."""
    if isinstance(vertices, np.ndarray):
        return vertices.reshape(len(vertices), -1).astype(np.int64)
    return np.array([v.table.ravel() for v in vertices], dtype=np.int64)


def classical_max(w, vertices):
    """max over vertices of <W, P>; exact (int or Fraction) for rational W."""
    coeffs = w.coefficients if isinstance(w, Witness) else np.asarray(w)
    V = vertex_matrix(vertices)
    if coeffs.size != V.shape[1]:
        raise ValidationError(f"witness of size {coeffs.shape} does not match {V.shape[1]} coordinates")
    flat = coeffs.ravel()
    if np.issubdtype(flat.dtype, np.integer):
        return int(np.max(V @ flat.astype(np.int64)))
    if flat.dtype == object:
        return max(sum((Fraction(c) * int(x) for c, x in zip(flat, row)), Fraction(0)) for row in V)
    return float(np.max(V @ flat.astype(float)))


def membership_lp(point, vertex_rows):
    """LP for point = sum_v lam_v v, sum lam = 1, lam >= 0."""
    V = np.asarray(vertex_rows).reshape(len(vertex_rows), -1)
    A = np.vstack([V.T, np.ones((1, len(V)), dtype=V.dtype)])
    b = [Fraction(x) for x in np.asarray(point, dtype=float).ravel().tolist()] + [Fraction(1)]
    if np.asarray(point).dtype == object:
        b = [Fraction(x) for x in np.asarray(point).ravel()] + [Fraction(1)]
    return lp.solve(np.zeros(len(V), dtype=np.int64), A, b)


@dataclass
class MembershipResult:
    feasible: bool
    weights: dict | None = None            # vertex index -> Fraction weight
    separator: Witness | None = None       # <W,P> > bound >= max over vertices

    def to_dict(self):
        d = {"feasible": self.feasible}
        if self.weights is not None:
            d["weights"] = [{"vertex": i, "weight": str(w), "weight_float": float(w)}
                            for i, w in sorted(self.weights.items())]
        if self.separator is not None:
            d["separator"] = {
                "coefficients": [[str(c) for c in row] for row in self.separator.coefficients.tolist()],
                "coefficients_float": np.asarray(self.separator.coefficients, dtype=float).tolist(),
                "bound": str(self.separator.classical_bound),
                "bound_float": float(self.separator.classical_bound),
            }
        return d


def _integer_separator(y, n):
    """Scale a rational Farkas vector to coprime integers."""
    den = 1
    for v in y:
        den = den * v.denominator // np.gcd(den, v.denominator)
    ints = [int(v * den) for v in y]
    g = 0
    for v in ints:
        g = np.gcd(g, abs(v))
    g = g or 1
    ints = [v // g for v in ints]
    return np.array(ints[:-1], dtype=np.int64).reshape(n, n), -ints[-1]


def membership(p, vertices):
    """Decide P in conv(vertices) with an exact certificate either way."""
    p = np.asarray(p)
    n = p.shape[0]
    V = vertex_matrix(vertices)
    if V.shape[1] != n * n:
        raise ValidationError("table size does not match the vertex list")
    res = membership_lp(p, V)
    if res.status == "optimal":
        weights = {i: x for i, x in enumerate(res.x) if x != 0}
        return MembershipResult(True, weights=weights)
    coeffs, bound = _integer_separator(res.farkas, n)
    return MembershipResult(False, separator=Witness(coeffs, bound))
