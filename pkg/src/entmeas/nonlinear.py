"""Nonlinear witness for the three-input scenario.

If M is separable, M = sum_i lam_i |u_i><u_i| (x) |v_i><v_i|, then for every k, l

    4 (P11 + P22 + P33) / (1 - R)^2 - P[k, l] >= 0,

with R the largest pairwise overlap bound obtainable from the observed
table through the fidelity bound f. A negative entry certifies that the
measurement is entangled.
"""
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .scenario import ValidationError, as_table, evaluate_probabilities

INCONCLUSIVE_MARGIN = 1e-12
CHECK_TOL = 1e-9
RANGE_TOL = 1e-12


def fidelity_bound(p1, p2):
    """f(P1, P2) = sqrt(P1 P2) + sqrt((1 - P1)(1 - P2)); works elementwise on arrays."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    for p in (p1, p2):
        if np.any(p < -RANGE_TOL) or np.any(p > 1 + RANGE_TOL) or np.any(np.isnan(p)):
            raise ValidationError("fidelity_bound arguments must lie in [0, 1]")
    p1 = np.clip(p1, 0.0, 1.0)
    p2 = np.clip(p2, 0.0, 1.0)
    out = np.sqrt(p1 * p2) + np.sqrt((1 - p1) * (1 - p2))
    out = np.minimum(out, 1.0)
    return float(out) if out.ndim == 0 else out


def _check_n3(p):
    p = as_table(p)
    if p.shape != (3, 3):
        raise ValidationError(f"the nonlinear witness needs a 3x3 table, got {p.shape}")
    return p


def overlap_bound_r(p):
    """R = max over j != k of min_l f(P[j,l], P[k,l]) and min_l f(P[l,j], P[l,k])."""
    p = _check_n3(p)
    off = ~np.eye(3, dtype=bool)
    rows = fidelity_bound(p[:, None, :], p[None, :, :]).min(axis=-1)
    cols = fidelity_bound(p.T[:, None, :], p.T[None, :, :]).min(axis=-1)
    return float(max(rows[off].max(), cols[off].max()))


@dataclass
class NonlinearReport:
    r_value: float
    witness_values: np.ndarray | None
    min_value: float | None
    certified_entangled: bool
    reason: str = ""

    def to_dict(self):
        return {
            "r_value": self.r_value,
            "witness_values": None if self.witness_values is None else self.witness_values.tolist(),
            "min_value": self.min_value,
            "certified_entangled": self.certified_entangled,
            "reason": self.reason,
        }


def evaluate_nonlinear_witness(p):
    p = _check_n3(p)
    r = overlap_bound_r(p)
    if r >= 1 - INCONCLUSIVE_MARGIN:
        return NonlinearReport(r, None, None, False,
                               reason=f"inconclusive: R = {r:.12g} is 1 and the bound is vacuous")
    lhs = 4 * np.trace(p) / (1 - r) ** 2
    values = lhs - p
    min_value = float(values.min())
    certified = min_value < 0
    if certified:
        k, l = np.unravel_index(np.argmin(values), values.shape)
        reason = f"violated at (k, l) = ({k + 1}, {l + 1}): no unentangled measurement reproduces the table"
    else:
        reason = "satisfied for all (k, l): no conclusion"
    return NonlinearReport(r, values, min_value, bool(certified), reason)


@dataclass(frozen=True)
class SeparableTerm:
    weight: float
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.weight > 0:
            raise ValidationError("separable term weight must be positive")
        for s in (self.u, self.v):
            s = np.asarray(s)
            if s.shape != (2,) or abs(np.linalg.norm(s) - 1) > 1e-9:
                raise ValidationError("separable term states must be unit qubit vectors")

    def operator(self):
        return self.weight * qcore.tensor_product(qcore.projector(self.u), qcore.projector(self.v))


def separable_operator(terms):
    return sum(t.operator() for t in terms)


def _perp(psi):
    return np.stack([-psi[..., 1].conj(), psi[..., 0].conj()], axis=-1)


def random_separable_experiment(rng, n_terms=None, structured=False, noise=0.05):
    """Table from a random separable M (scaled into [0, I]) and random pure preparations.

    With ``structured`` the product terms are built from states orthogonal to
    the preparations (plus ``noise``), which pushes the diagonal of the table
    toward zero: the regime where the nonlinear witness is tight.
    Returns (table, terms, rho amplitudes, sigma amplitudes).
    """
    if n_terms is None:
        n_terms = int(rng.integers(1, 7))
    psi = qcore.random_pure_states(rng, 3)
    phi = qcore.random_pure_states(rng, 3)
    if structured:
        a = rng.integers(0, 3, n_terms)
        b = rng.integers(0, 3, n_terms)
        us = qcore.normalize(_perp(psi[a]) + noise * qcore.random_pure_states(rng, n_terms))
        vs = qcore.normalize(_perp(phi[b]) + noise * qcore.random_pure_states(rng, n_terms))
    else:
        us = qcore.random_pure_states(rng, n_terms)
        vs = qcore.random_pure_states(rng, n_terms)
    lam = rng.random(n_terms) + 1e-3
    m = np.einsum("i,iab,icd->acbd", lam, qcore.projector(us), qcore.projector(vs)).reshape(4, 4)
    lam = lam / np.linalg.eigvalsh(m)[-1]
    terms = [SeparableTerm(float(l), u, v) for l, u, v in zip(lam, us, vs)]
    m = separable_operator(terms)
    table = evaluate_probabilities(qcore.projector(psi), qcore.projector(phi), m)
    return np.clip(table, 0.0, 1.0), terms, psi, phi


def _check_operator(a, name, density=False):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise ValidationError(f"{name} must be a 2x2 or 4x4 matrix")
    ok = qcore.is_density_matrix(a) if density else qcore.is_povm_element(a)
    if not ok:
        raise ValidationError(f"{name} is not a valid {'state' if density else 'POVM element'}")
    return a


def check_prop1(a, omega1, omega2):
    """tr(w1 w2) <= f(tr(A w1), tr(A w2))^2, up to 1e-9."""
    a = _check_operator(a, "A")
    w1 = _check_operator(omega1, "omega1", density=True)
    w2 = _check_operator(omega2, "omega2", density=True)
    if not a.shape == w1.shape == w2.shape:
        raise ValidationError("operators must share one dimension")
    p1 = np.clip(np.trace(a @ w1).real, 0, 1)
    p2 = np.clip(np.trace(a @ w2).real, 0, 1)
    return bool(np.trace(w1 @ w2).real <= fidelity_bound(p1, p2) ** 2 + CHECK_TOL)


def prop2_constants(weight, u, v, rho, sigma):
    """Tightest (C, c) for one term: largest pairwise overlap, largest diagonal value."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    omega = SeparableTerm(weight, u, v).operator()
    big_c = 0.0
    for s in (rho, sigma):
        for j in range(3):
            for k in range(j + 1, 3):
                big_c = max(big_c, np.trace(s[j] @ s[k]).real)
    small_c = max(np.trace(omega @ qcore.tensor_product(rho[j], sigma[j])).real for j in range(3))
    return float(big_c), float(small_c)


def check_prop2(weight, u, v, rho, sigma):
    """weight <= 4c / (1 - sqrt(C))^2 with the tightest C, c for these states."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != (3, 2, 2) or sigma.shape != (3, 2, 2):
        raise ValidationError("need three qubit states per side")
    for s in list(rho) + list(sigma):
        if not qcore.is_density_matrix(s):
            raise ValidationError("rho and sigma must be qubit states")
    big_c, small_c = prop2_constants(weight, u, v, rho, sigma)
    if big_c >= 1 - INCONCLUSIVE_MARGIN:
        raise ValidationError("overlap bound C >= 1: the term bound is vacuous")
    return bool(weight <= 4 * small_c / (1 - np.sqrt(big_c)) ** 2 + CHECK_TOL)
