"""Scan of integer witnesses with coefficients in {-1, 0, 1}.

Candidate i in [0, 3**(N*N)) is the matrix whose base-3 digits (most
significant first, row-major) are its coefficients + 1, so numeric order
of the index is lexicographic order of the coefficients. Only the
lexicographically smallest member of each symmetry orbit is examined, so
the output is deduplicated by canonical form by construction.

Long scans are split into chunks; after each chunk a checkpoint file
(shard range, next index, results so far) can be written, and a later call
with the same checkpoint resumes where the previous one stopped.
"""
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import symmetry
from ..scenario import Scenario, ValidationError, Witness
from .facets import is_facet
from .vertices import enumerate_vertices, vertex_matrix

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
CHUNK = 2048


def n_candidates(n):
    return 3 ** (n * n)


def coefficients_of(index, n):
    """Coefficient matrix of candidate ``index``."""
    if not 0 <= index < n_candidates(n):
        raise ValidationError(f"candidate index {index} out of range for N={n}")
    digits = np.zeros(n * n, dtype=np.int64)
    for k in range(n * n - 1, -1, -1):
        index, digits[k] = divmod(index, 3)
    return (digits - 1).reshape(n, n)


def index_of(coeffs):
    flat = np.asarray(coeffs).ravel()
    if not np.all(np.isin(flat, (-1, 0, 1))):
        raise ValidationError("scan candidates have coefficients in {-1, 0, 1}")
    index = 0
    for c in flat.tolist():
        index = 3 * index + int(c) + 1
    return index


def _digits(start, stop, m):
    idx = np.arange(start, stop, dtype=np.int64)
    powers = 3 ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers) % 3


def classify(coeffs, V):
    """(facet-defining?, classical bound, number of tight vertices) for an integer matrix."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    bound = int(np.max(V @ coeffs.ravel()))
    ok, n_tight = is_facet(Witness(coeffs, bound), V)
    return ok, bound, n_tight


def _record(index, coeffs, bound, n_tight):
    return {"index": int(index), "coefficients": coeffs.tolist(),
            "classical_bound": int(bound), "n_tight": int(n_tight)}


def scan_range(n, start, stop, V):
    """Facet-defining canonical candidates with index in [start, stop)."""
    m = n * n
    zero = (3 ** m - 1) // 2      # all digits 1: the zero matrix
    out = []
    for lo in range(start, stop, CHUNK):
        hi = min(stop, lo + CHUNK)
        digits = _digits(lo, hi, m)
        keep = symmetry.ternary_codes_canonical(digits)
        for j in np.nonzero(keep)[0]:
            index = lo + int(j)
            if index == zero:
                continue
            coeffs = (digits[j] - 1).reshape(n, n)
            ok, bound, n_tight = classify(coeffs, V)
            if ok:
                out.append(_record(index, coeffs, bound, n_tight))
    return out


def _worker(args):
    n, start, stop = args
    V = vertex_matrix(enumerate_vertices(n))
    return scan_range(n, start, stop, V)


def _load_checkpoint(path, n, start, stop):
    with open(path) as fh:
        state = json.load(fh)
    if state.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(f"checkpoint {path} has unsupported version {state.get('version')}")
    if (state["n"], state["start"], state["stop"]) != (n, start, stop):
        raise ValidationError(f"checkpoint {path} belongs to a different shard")
    return state


def _save_checkpoint(path, state):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(state, fh, sort_keys=True)
    os.replace(tmp, path)


def scan_integer_witnesses(scenario, start=0, stop=None, vertices=None, checkpoint=None,
                           chunks_per_checkpoint=8, workers=1, max_chunks=None):
    """Facet-defining canonical {-1,0,1} witnesses with candidate index in [start, stop).

    Returns (results, finished). ``max_chunks`` stops early after that many
    chunks (the checkpoint then records where to resume). With ``workers``
    > 1 the chunks of each checkpoint interval run in separate processes.
    """
    n = scenario.n_inputs if isinstance(scenario, Scenario) else int(scenario)
    Scenario(n)
    total = n_candidates(n)
    stop = total if stop is None else stop
    if not 0 <= start <= stop <= total:
        raise ValidationError(f"shard [{start}, {stop}) outside [0, {total})")
    state = {"version": CHECKPOINT_VERSION, "n": n, "start": start, "stop": stop,
             "next_index": start, "results": []}
    if checkpoint is not None and os.path.exists(checkpoint):
        state = _load_checkpoint(checkpoint, n, start, stop)
        log.info("resuming shard [%d, %d) at %d", start, stop, state["next_index"])
    V = None
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    done_chunks = 0
    try:
        while state["next_index"] < stop:
            if max_chunks is not None and done_chunks >= max_chunks:
                break
            k = chunks_per_checkpoint
            if max_chunks is not None:
                k = min(k, max_chunks - done_chunks)
            lo = state["next_index"]
            bounds = [(a, min(stop, a + CHUNK)) for a in range(lo, min(stop, lo + k * CHUNK), CHUNK)]
            if pool is not None:
                parts = list(pool.map(_worker, [(n, a, b) for a, b in bounds]))
            else:
                if V is None:
                    V = vertex_matrix(vertices if vertices is not None else enumerate_vertices(n))
                parts = [scan_range(n, a, b, V) for a, b in bounds]
            for p in parts:
                state["results"].extend(p)
            state["next_index"] = bounds[-1][1]
            done_chunks += len(bounds)
            if checkpoint is not None:
                _save_checkpoint(checkpoint, state)
            log.info("scanned up to %d of [%d, %d): %d facets", state["next_index"], start, stop,
                     len(state["results"]))
    finally:
        if pool is not None:
            pool.shutdown()
    return merge_results([state["results"]]), state["next_index"] >= stop


def merge_results(parts):
    """Union of shard outputs, deduplicated by canonical form, sorted by index."""
    seen = {}
    for part in parts:
        for r in part:
            seen.setdefault(r["index"], r)
    return [seen[k] for k in sorted(seen)]


def scan_candidates(candidates, vertices):
    """Canonicalize arbitrary integer matrices and keep the facet-defining ones (deduplicated)."""
    V = vertex_matrix(vertices)
    out = {}
    for c in candidates:
        c = np.asarray(c, dtype=np.int64)
        canon = symmetry.canonical_form(Witness(c)).coefficients
        if not np.any(canon):
            continue
        ok, bound, n_tight = classify(canon, V)
        if ok:
            idx = index_of(canon) if np.all(np.isin(canon, (-1, 0, 1))) else None
            key = tuple(canon.ravel().tolist())
            out.setdefault(key, {"index": idx, "coefficients": canon.tolist(),
                                 "classical_bound": bound, "n_tight": n_tight})
    return [out[k] for k in sorted(out)]


def to_witness(record):
    return Witness(np.array(record["coefficients"], dtype=np.int64), record["classical_bound"])


def write_jsonl(records, path):
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def read_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
