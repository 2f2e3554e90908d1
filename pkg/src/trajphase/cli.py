"""Command-line front end.

    trajphase enumerate --scenario S.json [--min-weight X] [--epsilon X] [--close-loop BOOL] [--csv]
    trajphase sample    --scenario S.json --n COUNT [--seed U64] [--csv]
    trajphase interfere --scenario S.json --trajectory 0,1,0 [--grid SIZE] [--fringe-dir DIR] [--csv]
    trajphase average   --scenario S.json [--mixers M.json] [--min-weight X] [--csv]

Output is one JSON object per line on stdout (or CSV with ``--csv``), written
only after the whole computation succeeded. Exit codes: 0 success,
2 invalid input, 3 too many trajectories to enumerate, 4 numerical failure.
``HOLONOMY_THREADS`` caps worker threads; output does not depend on it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import ordered_map
from .channels import matrix_from_json
from .ensemble import average_holonomy_report, representation_dependence_demo
from .errors import (
    CombinatorialOverflow,
    DeadEnd,
    DegenerateFringe,
    ScenarioError,
    SingularOperator,
    TrajPhaseError,
    UndefinedPhaseMass,
    ZeroPhaseUndefined,
)
from .interferometry import run_protocol
from .phases import pancharatnam_phase, uhlmann_holonomy
from .scenario import load_scenario
from .trajectories import ENUMERATION_CAP, enumerate_trajectories, sample_many, validate_index

EXIT_OK, EXIT_INVALID, EXIT_OVERFLOW, EXIT_NUMERIC = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _pair(z):
    return [float(z.real), float(z.imag)]


def derive_seeds(master: int, n: int) -> list:
    """Per-record seeds: the first ``n`` 64-bit words of ``numpy.random.SeedSequence(master)``.

    The words are prefix-stable, so record ``i`` gets the same seed for any ``n > i``.
    """
    return [int(s) for s in np.random.SeedSequence(master).generate_state(n, np.uint64)]


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _index(text):
    try:
        return tuple(int(a) for a in text.replace(" ", "").split(",") if a != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"trajectory must be comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# commands: each returns a list of records


def cmd_enumerate(sc, args):
    opts = sc.options
    trajs = enumerate_trajectories(sc.sequence, sc.initial, opts.min_weight, opts.tol)

    def row(t):
        rec = {"type": "trajectory", "index": list(t.index), "norms": t.norms, "weight": t.weight,
               "elided": t.elided}
        if t.elided:
            return rec
        if trajs.kind == "pure":
            try:
                rec["phase"] = _pair(pancharatnam_phase(t.states, opts.tol))
            except ZeroPhaseUndefined:
                rec["phase"] = None
                rec["phase_error"] = "ZeroPhaseUndefined"
        else:
            try:
                h = uhlmann_holonomy(t.states, opts.close_loop, opts.epsilon, opts.tol)
                rec["holonomy"] = {"eigenphases": [float(x) for x in h.eigenphases],
                                   "trace": _pair(np.trace(h.operator))}
            except SingularOperator:
                rec["holonomy"] = None
                rec["holonomy_error"] = "SingularOperator"
        return rec

    records = ordered_map(row, trajs.trajectories)
    records.append({"type": "totals", "count": len(trajs), "total_weight": trajs.total_weight,
                    "elided_weight": trajs.elided_weight, "retained": len(trajs.retained)})
    return records


def cmd_sample(sc, args):
    if not sc.is_pure:
        raise CliError("sampling needs a pure initial state", EXIT_INVALID)
    if args.n < 1:
        raise CliError("--n must be at least 1", EXIT_INVALID)
    master = args.seed if args.seed is not None else sc.options.seed
    tol = sc.options.tol

    seeds = derive_seeds(master, args.n)
    records = []
    for i, (s, t) in enumerate(zip(seeds, sample_many(sc.sequence, sc.initial, seeds, tol))):
        if isinstance(t, DeadEnd):
            records.append({"type": "sample", "i": i, "seed": s, "dead_end": t.step})
        else:
            records.append({"type": "sample", "i": i, "seed": s, "index": list(t.index), "weight": t.weight})
    counts = {}
    dead = 0
    for r in records:
        if "dead_end" in r:
            dead += 1
        else:
            key = tuple(r["index"])
            counts[key] = counts.get(key, 0) + 1
    summary = []
    if math.prod(sc.sequence.counts) <= ENUMERATION_CAP:
        trajs = enumerate_trajectories(sc.sequence, sc.initial, 0.0, tol)
        for t in trajs:
            c = counts.get(t.index, 0)
            sigma = math.sqrt(max(t.weight * (1 - t.weight), 0.0) / args.n)
            summary.append({"type": "frequency", "index": list(t.index), "count": c, "frequency": c / args.n,
                            "weight": t.weight, "sigma": sigma,
                            "z": (c / args.n - t.weight) / sigma if sigma > 0 else None})
    else:
        for key in sorted(counts):
            summary.append({"type": "frequency", "index": list(key), "count": counts[key],
                            "frequency": counts[key] / args.n})
    summary.append({"type": "sample_totals", "n": args.n, "master_seed": master, "dead_ends": dead})
    return records + summary


def cmd_interfere(sc, args):
    if not sc.is_pure:
        raise CliError("interferometry needs a pure initial state", EXIT_INVALID)
    idx = args.trajectory if args.trajectory is not None else (0,) * sc.sequence.n_steps
    try:
        idx = validate_index(sc.sequence, idx)
    except TrajPhaseError as exc:
        raise CliError(f"{type(exc).__name__}: {exc}", EXIT_INVALID) from None
    grid = args.grid if args.grid is not None else sc.options.grid_size
    if grid < 8:
        raise CliError("--grid must be at least 8", EXIT_INVALID)
    res = run_protocol(sc.sequence, sc.initial, idx, grid, sc.options.tol)
    records = [dict(type="step", **r.to_dict()) for r in res.records]
    records.append({"type": "product", "index": list(res.index), "product": _pair(res.product),
                    "exact": _pair(res.exact), "error": res.error, "weight": res.weight})
    if args.fringe_dir:
        out = Path(args.fringe_dir)
        out.mkdir(parents=True, exist_ok=True)
        for r in res.records:
            np.savetxt(out / f"fringe_step{r.step:03d}.txt", r.scan.to_columns(), fmt="%.17g",
                       header="chi intensity")
    return records


def _load_mixers(path, sc):
    try:
        doc = json.loads(Path(path).read_text())
        decomps = doc["decompositions"]
        mixers, labels = [], []
        for i, d in enumerate(decomps):
            labels.append(str(d.get("label", f"mixer{i + 1}")))
            if "mixer" in d:
                mixers.append(matrix_from_json(d["mixer"]))
            else:
                mixers.append([matrix_from_json(m) for m in d["mixers"]])
        return mixers, labels
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"invalid mixers file: {type(exc).__name__}: {exc}", EXIT_INVALID) from None


def cmd_average(sc, args):
    opts = sc.options
    if not sc.is_pure:
        rep = average_holonomy_report(sc.sequence, sc.initial, opts.min_weight, opts.close_loop,
                                      opts.epsilon, opts.tol)
        return [{"type": "holonomy_average", "exploratory": True,
                 "operator": [[_pair(z) for z in row] for row in rep.operator],
                 "singular_values": [float(s) for s in rep.singular_values],
                 "retained_weight": rep.retained_weight, "excluded_weight": rep.excluded_weight}]
    mixers, labels = _load_mixers(args.mixers, sc) if args.mixers else ([], [])
    try:
        rep = representation_dependence_demo(sc.sequence, sc.initial, mixers, labels, opts.min_weight,
                                             tol=opts.tol)
    except TrajPhaseError as exc:
        if isinstance(exc, UndefinedPhaseMass):
            raise
        raise CliError(f"{type(exc).__name__}: {exc}", EXIT_INVALID) from None
    records = [dict(type="average", **row) for row in rep.table()]
    names = [p.decomposition_label for p in rep.phases]
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            records.append({"type": "gap", "a": names[i], "b": names[j], "abs_difference": float(rep.gaps[i, j])})
    records.append({"type": "channel_action", "max_deviation": rep.action_deviation})
    return records


COMMANDS = {
    "enumerate": cmd_enumerate,
    "sample": cmd_sample,
    "interfere": cmd_interfere,
    "average": cmd_average,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="trajphase", description="Geometric phases of quantum trajectories")
    parser.add_argument("--version", action="version", version=f"trajphase {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, metavar="PATH")
        p.add_argument("--csv", action="store_true", help="write the table as CSV instead of JSON lines")
        p.add_argument("--min-weight", type=float, default=None)
        p.add_argument("--epsilon", type=float, default=None, help="regularization for mixed-state transport")
        p.add_argument("--close-loop", type=_bool, default=None, metavar="BOOL")
        p.add_argument("--seed", type=_u64, default=None)
        p.add_argument("--n", type=int, default=1, metavar="COUNT")
        p.add_argument("--trajectory", type=_index, default=None, metavar="I,J,...")
        p.add_argument("--grid", type=int, default=None, metavar="SIZE")
        p.add_argument("--fringe-dir", default=None, metavar="DIR")
        p.add_argument("--mixers", default=None, metavar="PATH")
    return parser


def _flatten(rec):
    out = {}
    for k, v in rec.items():
        if isinstance(v, (list, dict)):
            out[k] = json.dumps(v, separators=(",", ":"))
        else:
            out[k] = "" if v is None else v
    return out


def render(records, as_csv=False) -> str:
    if not as_csv:
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)
    fields = []
    for r in records:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(_flatten(r))
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        sc = load_scenario(args.scenario)
        overrides = {}
        if args.min_weight is not None:
            overrides["min_weight"] = args.min_weight
        if args.epsilon is not None:
            if not 0.0 <= args.epsilon <= 1.0:
                raise CliError("--epsilon must lie in [0, 1]", EXIT_INVALID)
            overrides["epsilon"] = args.epsilon
        if args.close_loop is not None:
            overrides["close_loop"] = args.close_loop
        if overrides:
            sc = replace(sc, options=replace(sc.options, **overrides))
        records = COMMANDS[args.command](sc, args)
    except (ScenarioError, OSError) as exc:
        print(f"error: invalid scenario: {exc}", file=stderr)
        return EXIT_INVALID
    except CliError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.code
    except CombinatorialOverflow as exc:
        print(f"error: CombinatorialOverflow: {exc}", file=stderr)
        return EXIT_OVERFLOW
    except UndefinedPhaseMass as exc:
        print(f"error: UndefinedPhaseMass: {exc} (excluded weight {exc.excluded_weight!r})", file=stderr)
        return EXIT_NUMERIC
    except DegenerateFringe as exc:
        print(f"error: DegenerateFringe at step {exc.step}: {exc}", file=stderr)
        return EXIT_NUMERIC
    except TrajPhaseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    provenance = {"scenario_hash": sc.digest, "version": __version__}
    records = [{**r, **provenance} for r in records]
    stdout.write(render(records, args.csv))
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
