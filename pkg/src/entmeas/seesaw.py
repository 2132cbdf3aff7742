"""See-saw maximization of a linear witness over qubit preparations and one POVM element.

Each round solves three exact conditional maximizations: the POVM element
for fixed states (an SDP with partial-transpose constraints in the
unentangled mode, an eigenprojection in the entangled mode), then every
rho_x, then every sigma_y (top eigenvectors). Restarts run in lockstep as a
numpy batch, in fixed-size chunks so results do not depend on the thread
count.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import qcore, sdp
from .scenario import Witness, evaluate_probabilities, witness_value

log = logging.getLogger(__name__)

MODES = ("unentangled", "entangled")
CHUNK = 100
RESULT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SeeSawConfig:
    restarts: int = 200
    max_rounds: int = 500
    convergence_epsilon: float = 1e-9
    seed: int = 0
    mode: str = "unentangled"
    sdp_tolerance: float = 1e-9
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.convergence_epsilon <= 0:
            raise ValueError("convergence_epsilon must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SeeSawResult:
    value: float
    rho: np.ndarray          # (N, 2) amplitudes
    sigma: np.ndarray        # (N, 2) amplitudes
    m: np.ndarray            # (4, 4)
    trace: list
    converged: bool
    negativity: float
    restart: int = 0
    mode: str = "unentangled"
    local_optima: list = field(default_factory=list)
    failed_restarts: int = 0


def build_objective_operator(w, rho, sigma):
    """F = sum_xy W[x,y] rho_x (x) sigma_y; rho and sigma are density-matrix stacks.

    Accepts a leading batch axis on rho and sigma.
    """
    coeffs = np.asarray(w.coefficients if isinstance(w, Witness) else w, dtype=float)
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    n = coeffs.shape[0]
    if rho.shape[-3] != n or sigma.shape[-3] != n or coeffs.shape != (n, n):
        raise ValueError("witness size does not match the number of states")
    f = np.einsum("xy,...xij,...ykl->...ikjl", coeffs, rho, sigma)
    return f.reshape(f.shape[:-4] + (4, 4))


def _alice_operators(coeffs, sigma, m):
    """G_x = tr_B(sum_y W[x,y] (I (x) sigma_y) M), batched: (..., N, 2, 2)."""
    m4 = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    q = np.einsum("...yab,...ibja->...yij", sigma, m4)
    return qcore.hermitize(np.einsum("xy,...yij->...xij", coeffs, q))


def _bob_operators(coeffs, rho, m):
    """H_y = tr_A(sum_x W[x,y] (rho_x (x) I) M), batched: (..., N, 2, 2)."""
    m4 = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    q = np.einsum("...xab,...bkal->...xkl", rho, m4)
    return qcore.hermitize(np.einsum("xy,...xkl->...ykl", coeffs, q))


def update_alice_states(w, sigma, m):
    """Optimal pure rho_x for fixed sigma_y and M: (amplitudes (N, 2), objective)."""
    coeffs = np.asarray(w.coefficients, dtype=float)
    g = _alice_operators(coeffs, np.asarray(sigma, dtype=complex), np.asarray(m, dtype=complex))
    vals, vecs = qcore.max_eigenpair(g)
    return vecs, float(np.sum(vals))


def update_bob_states(w, rho, m):
    coeffs = np.asarray(w.coefficients, dtype=float)
    h = _bob_operators(coeffs, np.asarray(rho, dtype=complex), np.asarray(m, dtype=complex))
    vals, vecs = qcore.max_eigenpair(h)
    return vecs, float(np.sum(vals))


def _objective(coeffs, rho, sigma, m):
    f = build_objective_operator(coeffs, rho, sigma)
    return np.einsum("...ij,...ji->...", m, f).real


def _initial_states(seed, restart_ids, n):
    a = np.empty((len(restart_ids), n, 2), dtype=complex)
    b = np.empty_like(a)
    for i, r in enumerate(restart_ids):
        rng = np.random.default_rng([seed, r])
        a[i] = qcore.random_pure_states(rng, n)
        b[i] = qcore.random_pure_states(rng, n)
    return a, b


def _sdp_tolerance(delta, floor):
    """Loose SDP solves while the see-saw is far from converged, tight near the end."""
    with np.errstate(divide="ignore"):
        tol = 10.0 ** np.floor(np.log10(1e-3 * np.abs(delta)))
    return np.clip(tol, floor, 1e-4)


def _ppt_step(f, delta, floor):
    tol = float(_sdp_tolerance(delta, floor).min())
    m_new, _, _, _, ok = sdp.solve_ppt_batch(f, tolerance=tol)
    return m_new, ok


def _run_chunk(coeffs, config, restart_ids):
    n = coeffs.shape[0]
    nr = len(restart_ids)
    psi, phi = _initial_states(config.seed, restart_ids, n)
    m = np.zeros((nr, 4, 4), dtype=complex)
    obj = np.zeros(nr)
    traces = [[] for _ in range(nr)]
    active = np.ones(nr, dtype=bool)
    converged = np.zeros(nr, dtype=bool)
    failed = np.zeros(nr, dtype=bool)
    delta = np.full(nr, np.inf)
    for _ in range(config.max_rounds):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        rho = qcore.projector(psi[idx])
        sigma = qcore.projector(phi[idx])
        f = build_objective_operator(coeffs, rho, sigma)
        if config.mode == "entangled":
            m_new, _ = sdp.solve_unconstrained_entangled(f)
        else:
            m_new, ok = _ppt_step(f, delta[idx], config.sdp_tolerance)
            if not ok.all():
                bad = idx[~ok]
                for r in bad:
                    log.warning("restart %d abandoned: SDP did not converge", restart_ids[r])
                failed[bad] = True
                active[bad] = False
                keep = ok
                idx, f, m_new = idx[keep], f[keep], m_new[keep]
                rho, sigma = rho[keep], sigma[keep]
        # keep the previous element when the new solve is not better (monotone objective)
        old_val = np.einsum("bij,bji->b", m[idx], f).real
        new_val = np.einsum("bij,bji->b", m_new, f).real
        better = new_val > old_val
        m[idx] = np.where(better[:, None, None], m_new, m[idx])
        m_cur = m[idx]
        g = _alice_operators(coeffs, sigma, m_cur)
        _, vecs = qcore.max_eigenpair(g)
        psi[idx] = vecs
        rho = qcore.projector(vecs)
        h = _bob_operators(coeffs, rho, m_cur)
        vals, vecs = qcore.max_eigenpair(h)
        phi[idx] = vecs
        value = vals.sum(axis=-1)
        delta[idx] = value - obj[idx]
        obj[idx] = value
        for j, r in enumerate(idx):
            traces[r].append(float(value[j]))
        done = np.abs(delta[idx]) < config.convergence_epsilon
        converged[idx[done]] = True
        active[idx[done]] = False
    return psi, phi, m, obj, traces, converged, failed


def optimize(w, config=SeeSawConfig()):
    """Best see-saw value over all restarts; a lower bound on the true optimum."""
    coeffs = np.asarray(w.coefficients, dtype=float)
    ids = np.arange(config.restarts)
    chunks = [ids[i:i + CHUNK] for i in range(0, len(ids), CHUNK)]
    if config.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            parts = list(pool.map(lambda c: _run_chunk(coeffs, config, c), chunks))
    else:
        parts = [_run_chunk(coeffs, config, c) for c in chunks]
    psi = np.concatenate([p[0] for p in parts])
    phi = np.concatenate([p[1] for p in parts])
    m = np.concatenate([p[2] for p in parts])
    obj = np.concatenate([p[3] for p in parts])
    traces = [t for p in parts for t in p[4]]
    converged = np.concatenate([p[5] for p in parts])
    failed = np.concatenate([p[6] for p in parts])
    if failed.all():
        raise sdp.SdpConvergenceError("every restart failed in the SDP step")
    # exact recomputation from the certificate; ties go to the lowest restart index
    values = np.where(failed, -np.inf, _objective(coeffs, qcore.projector(psi), qcore.projector(phi), m))
    best = int(np.argmax(values))
    m_best = m[best]
    if config.mode == "unentangled":
        f = build_objective_operator(coeffs, qcore.projector(psi[best]), qcore.projector(phi[best]))
        m_best = sdp.polish(m_best, f)
    value = float(_objective(coeffs, qcore.projector(psi[best]), qcore.projector(phi[best]), m_best))
    negs = qcore.negativity(m)
    optima = _distinct_optima(values[converged], negs[converged], failed[converged])
    return SeeSawResult(value=value, rho=psi[best], sigma=phi[best], m=m_best,
                        trace=traces[best], converged=bool(converged[best]),
                        negativity=float(qcore.negativity(m_best)), restart=best,
                        mode=config.mode, local_optima=optima,
                        failed_restarts=int(failed.sum()))


def _distinct_optima(values, negs, failed, digits=6):
    seen = {}
    for v, ng, bad in zip(values, negs, failed):
        if bad:
            continue
        key = round(float(v), digits)
        if key not in seen:
            seen[key] = {"value": key, "negativity": round(float(ng), digits), "count": 0}
        seen[key]["count"] += 1
    return sorted(seen.values(), key=lambda d: -d["value"])


def extract_certificate(result, w):
    """Self-contained report of the optimizing states and element."""
    rho = qcore.projector(result.rho)
    sigma = qcore.projector(result.sigma)
    m = qcore.hermitize(result.m)
    table = evaluate_probabilities(rho, sigma, m)
    value = witness_value(w, table)
    return {
        "value": value,
        "rho": _amplitudes(result.rho),
        "sigma": _amplitudes(result.sigma),
        "m": {"real": m.real.tolist(), "imag": m.imag.tolist()},
        "m_eigenvalues": np.linalg.eigvalsh(m).tolist(),
        "pt_eigenvalues": qcore.pt_eigenvalues(m).tolist(),
        "negativity": float(qcore.negativity(m)),
        "probabilities": table.tolist(),
    }


def _amplitudes(states):
    states = np.asarray(states)
    return [{"real": s.real.tolist(), "imag": s.imag.tolist()} for s in states]


def certificate_states(cert):
    """Inverse of the amplitude encoding used by ``extract_certificate``."""
    def dec(lst):
        return np.array([np.array(s["real"]) + 1j * np.array(s["imag"]) for s in lst])
    m = np.array(cert["m"]["real"]) + 1j * np.array(cert["m"]["imag"])
    return dec(cert["rho"]), dec(cert["sigma"]), m


def result_to_dict(result, w, seed):
    cert = extract_certificate(result, w)
    return {
        "schema_version": RESULT_SCHEMA_VERSION,
        "witness": w.to_dict(),
        "mode": result.mode,
        "value": cert["value"],
        "negativity": cert["negativity"],
        "m_eigenvalues": cert["m_eigenvalues"],
        "pt_eigenvalues": cert["pt_eigenvalues"],
        "probabilities": cert["probabilities"],
        "trace_length": len(result.trace),
        "converged": result.converged,
        "restart": result.restart,
        "failed_restarts": result.failed_restarts,
        "local_optima": result.local_optima,
        "seed": seed,
        "certificate": {"rho": cert["rho"], "sigma": cert["sigma"], "m": cert["m"]},
    }
