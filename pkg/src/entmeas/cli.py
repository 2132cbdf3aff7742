"""Command-line front end.

Every command writes one JSON document (or CSV rows) to stdout or --output.
Option values come from, in order of precedence: command-line flags, the
ENTMEAS_THREADS / ENTMEAS_OUTPUT environment variables (threads and output
path only), a JSON --config file, then built-in defaults.

Exit codes: 0 success, 1 reproduction rows outside tolerance, 2 validation
error, 3 numerical non-convergence, 4 unsupported scenario.
"""
import argparse
import csv
import io
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import nonlinear, seesaw, tables
from .polytope import (FacetEnumerationError, enumerate_facets, enumerate_vertices,
                       facet_classes, is_positivity_facet, membership)
from .polytope import scan as scan_mod
from .scenario import (Scenario, UnsupportedScenarioError, ValidationError, load_table,
                       load_witness)
from .sdp import SdpConvergenceError

log = logging.getLogger("entmeas")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_REPRODUCTION, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4
ENV_THREADS = "ENTMEAS_THREADS"
ENV_OUTPUT = "ENTMEAS_OUTPUT"

DEFAULTS = {
    "seed": 0, "threads": 1, "output": None, "format": "json",
    "n": 3, "dump": False, "jsonl": None,
    "witness": None, "mode": "unentangled", "restarts": 200, "max_rounds": 500,
    "epsilon": 1e-9, "sdp_tolerance": 1e-9, "cases": None,
    "table": None, "start": 0, "stop": None, "checkpoint": None,
    "chunks_per_checkpoint": 8, "max_chunks": None,
}

# list-valued field that becomes the CSV rows of each command
CSV_ROWS = {"vertices": "vertices", "facets": "classes", "table1": "rows", "table2": "rows",
            "scan": "results"}


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_builtin(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else float(obj)
    return obj


def dumps(payload):
    return json.dumps(_to_builtin(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def to_csv(payload):
    key = CSV_ROWS.get(payload["command"])
    rows = payload[key] if key else [{k: v for k, v in payload.items()}]
    rows = [_to_builtin(r) for r in rows]
    fields = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) or v is None
                         else v for k, v in r.items()})
    return buf.getvalue()


# commands -------------------------------------------------------------------

def cmd_vertices(opts):
    vs = enumerate_vertices(Scenario(opts["n"]))
    out = {"n": opts["n"], "count": len(vs)}
    if opts["dump"]:
        out["vertices"] = [{"index": i, "alice_map": v.alice_map, "bob_map": v.bob_map,
                            "charlie_map": v.charlie_map, "table": v.table}
                           for i, v in enumerate(vs)]
    return out, EXIT_OK


def cmd_facets(opts):
    vs = enumerate_vertices(Scenario(opts["n"]))
    facets = enumerate_facets(vs)
    classes, n_pos = facet_classes(facets)
    if opts["jsonl"]:
        scan_mod.write_jsonl(_to_builtin([dict(f.to_dict(), positivity=is_positivity_facet(f)) for f in facets]),
                             opts["jsonl"])
    reps = [{"coefficients": w.coefficients, "classical_bound": w.classical_bound, "members": k}
            for w, k in sorted(classes.items(), key=lambda kv: kv[0].key())]
    return {"n": opts["n"], "count": len(facets), "positivity": n_pos, "classes": reps,
            "n_classes": len(reps)}, EXIT_OK


def _seesaw_config(opts, mode):
    return seesaw.SeeSawConfig(restarts=opts["restarts"], max_rounds=opts["max_rounds"],
                               convergence_epsilon=opts["epsilon"], seed=opts["seed"], mode=mode,
                               sdp_tolerance=opts["sdp_tolerance"], threads=opts["threads"])


def cmd_optimize(opts):
    if not opts["witness"]:
        raise ValidationError("optimize needs --witness FILE")
    w = load_witness(opts["witness"])
    Scenario(w.n)
    result = seesaw.optimize(w, _seesaw_config(opts, opts["mode"]))
    return seesaw.result_to_dict(result, w, opts["seed"]), EXIT_OK


def _cmd_table(name):
    def run(opts):
        report = tables.reproduce_table(name, _seesaw_config(opts, "unentangled"), opts["cases"])
        for r in report["rows"]:
            if not r["ok"]:
                failed = [k for k, v in r["checks"].items() if not v]
                log.warning("%s case %d outside tolerance: %s", name, r["case"], ", ".join(failed))
        return report, EXIT_OK if report["all_ok"] else EXIT_REPRODUCTION
    return run


def cmd_nonlinear(opts):
    if not opts["table"]:
        raise ValidationError("nonlinear needs --table FILE")
    return nonlinear.evaluate_nonlinear_witness(load_table(opts["table"])).to_dict(), EXIT_OK


def cmd_membership(opts):
    if not opts["table"]:
        raise ValidationError("membership needs --table FILE")
    p = load_table(opts["table"])
    res = membership(p, enumerate_vertices(Scenario(p.shape[0])))
    return dict(res.to_dict(), n=p.shape[0]), EXIT_OK


def cmd_scan(opts):
    n = opts["n"]
    results, finished = scan_mod.scan_integer_witnesses(
        Scenario(n), opts["start"], opts["stop"], checkpoint=opts["checkpoint"],
        chunks_per_checkpoint=opts["chunks_per_checkpoint"], workers=opts["threads"],
        max_chunks=opts["max_chunks"])
    if opts["jsonl"]:
        scan_mod.write_jsonl(results, opts["jsonl"])
    stop = scan_mod.n_candidates(n) if opts["stop"] is None else opts["stop"]
    return {"n": n, "start": opts["start"], "stop": stop, "finished": finished,
            "count": len(results), "results": results}, EXIT_OK


COMMANDS = {
    "vertices": cmd_vertices, "facets": cmd_facets, "optimize": cmd_optimize,
    "table1": _cmd_table("table1"), "table2": _cmd_table("table2"),
    "nonlinear": cmd_nonlinear, "membership": cmd_membership, "scan": cmd_scan,
}


# argument handling ------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="64-bit seed for random restarts (default 0)")
    common.add_argument("--threads", type=int, help=f"worker threads/processes (env {ENV_THREADS})")
    common.add_argument("--output", help=f"write the report here instead of stdout (env {ENV_OUTPUT})")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--config", help="JSON file with option values, keyed like the flags")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    seesaw_opts = argparse.ArgumentParser(add_help=False)
    seesaw_opts.add_argument("--restarts", type=int)
    seesaw_opts.add_argument("--max-rounds", dest="max_rounds", type=int)
    seesaw_opts.add_argument("--epsilon", type=float, help="convergence threshold on the objective")
    seesaw_opts.add_argument("--sdp-tolerance", dest="sdp_tolerance", type=float)

    parser = argparse.ArgumentParser(prog="entmeas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vertices", parents=[common], help="count the classical polytope vertices")
    p.add_argument("--n", type=int)
    p.add_argument("--dump", action="store_true", default=None)

    p = sub.add_parser("facets", parents=[common], help="exact facet enumeration (N <= 3)")
    p.add_argument("--n", type=int)
    p.add_argument("--jsonl", help="export every facet as JSON lines")

    p = sub.add_parser("optimize", parents=[common, seesaw_opts], help="see-saw optimization")
    p.add_argument("--witness")
    p.add_argument("--mode", choices=seesaw.MODES)

    for name in ("table1", "table2"):
        p = sub.add_parser(name, parents=[common, seesaw_opts], help=f"reproduce {name}")
        p.add_argument("--cases", type=int, nargs="+", help="only these rows")

    p = sub.add_parser("nonlinear", parents=[common], help="evaluate the nonlinear witness")
    p.add_argument("--table")

    p = sub.add_parser("membership", parents=[common], help="classical membership certificate")
    p.add_argument("--table")

    p = sub.add_parser("scan", parents=[common], help="{-1,0,1} witness scan")
    p.add_argument("--n", type=int)
    p.add_argument("--start", type=int)
    p.add_argument("--stop", type=int)
    p.add_argument("--checkpoint")
    p.add_argument("--chunks-per-checkpoint", dest="chunks_per_checkpoint", type=int)
    p.add_argument("--max-chunks", dest="max_chunks", type=int,
                   help="stop after this many chunks (resume later from --checkpoint)")
    p.add_argument("--jsonl", help="also write the witnesses as JSON lines")
    return parser


def resolve_options(args, environ=None):
    environ = os.environ if environ is None else environ
    opts = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ValidationError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - set(DEFAULTS))
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        opts.update(cfg)
    if environ.get(ENV_THREADS):
        try:
            opts["threads"] = int(environ[ENV_THREADS])
        except ValueError as exc:
            raise ValidationError(f"{ENV_THREADS} must be an integer") from exc
    if environ.get(ENV_OUTPUT):
        opts["output"] = environ[ENV_OUTPUT]
    for k, v in vars(args).items():
        if k in DEFAULTS and v is not None:
            opts[k] = v
    if opts["threads"] < 1:
        raise ValidationError("threads must be >= 1")
    if opts["format"] not in ("json", "csv"):
        raise ValidationError("format must be json or csv")
    return opts


def run(argv=None, environ=None):
    """Run one command; returns (exit code, rendered output or None)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve_options(args, environ)
        payload, code = COMMANDS[args.command](opts)
    except (UnsupportedScenarioError, FacetEnumerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED, None
    except SdpConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, None
    except (ValidationError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION, None
    payload = dict(payload, command=args.command, schema_version=SCHEMA_VERSION)
    text = dumps(payload) if opts["format"] == "json" else to_csv(payload)
    if opts["output"]:
        with open(opts["output"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code, text


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
