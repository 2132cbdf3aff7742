"""The N22 prepare-and-measure scenario: tables, witnesses and their file formats."""
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import qcore

MAX_INPUTS = 6
TABLE_ATOL = 1e-12


class ValidationError(ValueError):
    pass


class UnsupportedScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    n_inputs: int
    dim: int = 2
    n_outcomes: int = 2

    def __post_init__(self):
        if self.dim != 2 or self.n_outcomes != 2:
            raise UnsupportedScenarioError(
                f"only D=2, K=2 is supported (got D={self.dim}, K={self.n_outcomes})")
        if not 1 <= self.n_inputs <= MAX_INPUTS:
            raise UnsupportedScenarioError(
                f"N must lie in 1..{MAX_INPUTS}, got {self.n_inputs}")
        if self.n_inputs <= self.dim:
            warnings.warn(f"N={self.n_inputs} <= D={self.dim}: every table is classically "
                          "reachable in this scenario", stacklevel=2)

    @property
    def name(self):
        return f"{self.n_inputs}{self.dim}{self.n_outcomes}"


def _is_integral(x):
    return float(x).is_integer()


@dataclass(frozen=True, eq=False)
class Witness:
    """Linear inequality sum_xy W[x,y] P[x,y] <= classical_bound.

    Integer-valued coefficients are kept as an int64 array so that bounds
    and facet tests can run in exact arithmetic.
    """
    coefficients: np.ndarray
    classical_bound: float | int | Fraction | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        w = np.asarray(self.coefficients)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValidationError(f"witness coefficients must be square, got {w.shape}")
        if np.issubdtype(w.dtype, np.integer) or np.all(np.mod(w, 1) == 0):
            w = w.astype(np.int64)
        else:
            w = w.astype(float)
        w.setflags(write=False)
        object.__setattr__(self, "coefficients", w)
        b = self.classical_bound
        if b is not None and not isinstance(b, Fraction) and _is_integral(b):
            object.__setattr__(self, "classical_bound", int(b))

    @property
    def n(self):
        return self.coefficients.shape[0]

    @property
    def is_integer(self):
        return np.issubdtype(self.coefficients.dtype, np.integer)

    def key(self):
        return tuple(self.coefficients.ravel().tolist()) + (self.classical_bound,)

    def __eq__(self, other):
        return isinstance(other, Witness) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def with_bound(self, bound):
        return Witness(self.coefficients, bound, self.label)

    def to_dict(self):
        b = self.classical_bound
        if isinstance(b, Fraction):
            b = int(b) if b.denominator == 1 else float(b)
        return {"n": self.n, "coefficients": self.coefficients.tolist(), "classical_bound": b}

    @classmethod
    def from_dict(cls, d):
        try:
            n = int(d["n"])
            coeffs = np.array(d["coefficients"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed witness record: {exc}") from exc
        if coeffs.shape != (n, n):
            raise ValidationError(f"witness declares n={n} but coefficients have shape {coeffs.shape}")
        return cls(coeffs, d.get("classical_bound"), d.get("label", ""))


def as_table(p, n=None):
    """Validate an N x N table of P(0|x,y) values and return it as float array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValidationError(f"probability table must be square, got shape {p.shape}")
    if n is not None and p.shape[0] != n:
        raise ValidationError(f"expected a {n}x{n} table, got {p.shape}")
    if np.any(p < -TABLE_ATOL) or np.any(p > 1 + TABLE_ATOL):
        raise ValidationError("probability table entries must lie in [0, 1]")
    return p


def _check_states(states, who):
    states = np.asarray(states, dtype=complex)
    if states.ndim != 3 or states.shape[1:] != (2, 2):
        raise ValidationError(f"{who} must be a stack of 2x2 density matrices, got {states.shape}")
    bad = np.nonzero(~qcore.density_matrix_mask(states))[0]
    if len(bad):
        raise ValidationError(f"{who}[{bad[0]}] is not a valid qubit density matrix")
    return states


def evaluate_probabilities(rho, sigma, m):
    """P[x,y] = tr(rho_x (x) sigma_y . M)."""
    rho = _check_states(rho, "rho")
    sigma = _check_states(sigma, "sigma")
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValidationError(f"POVM element must be 4x4, got {m.shape}")
    if not qcore.is_povm_element(m):
        raise ValidationError("M violates 0 <= M <= I")
    # tr((A(x)B) M) = sum A[j1,i1] B[j2,i2] M[(i1,i2),(j1,j2)]
    mt = m.reshape(2, 2, 2, 2)
    p = np.einsum("xji,ylk,ikjl->xy", rho, sigma, mt)
    if np.max(np.abs(p.imag)) > 1e-10:
        raise ValidationError("table has a non-negligible imaginary part")
    return p.real


def witness_value(w, p):
    coeffs = w.coefficients if isinstance(w, Witness) else np.asarray(w)
    p = np.asarray(p)
    if coeffs.shape != p.shape:
        raise ValidationError(f"shape mismatch: witness {coeffs.shape} vs table {p.shape}")
    return float(np.sum(coeffs * p))


def load_witness(path):
    with open(path) as fh:
        return Witness.from_dict(json.load(fh))


def save_witness(w, path):
    Path(path).write_text(json.dumps(w.to_dict()) + "\n")


def table_to_dict(p):
    p = np.asarray(p, dtype=float)
    return {"n": p.shape[0], "entries": p.tolist()}


def table_from_dict(d):
    try:
        n = int(d["n"])
        entries = d["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed probability table: {exc}") from exc
    return as_table(entries, n)


def load_table(path):
    with open(path) as fh:
        return table_from_dict(json.load(fh))


def save_table(p, path):
    Path(path).write_text(json.dumps(table_to_dict(p)) + "\n")
