"""Command-line entry point.

Each run writes its artifacts to out/<command>/<name>/ next to a
manifest.json recording the command, inputs, seed, and package version,
so any output can be reproduced byte-for-byte.  Output directories are
never overwritten: a colliding name is an input error.

Exit codes: 0 success, 1 input error, 2 internal assertion.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, fixtures
from .arch import arch_from_catalog, load_arch_config
from .circuits import NoiseParams, build_memory_circuit
from .codes import SpecParseError, build_code, catalog, load_spec
from .compiler import (compile_baseline, cost_report, map_qubits,
                       parse_program, schedule as schedule_program, sweep)
from .decoder import DecoderConfig, SplitDecoder
from .detectors import build_detector_model
from .layout import dump_csv, layout
from .sampler import adaptive_run, append_result_csv, sample
from .scheduler import cycle_time, schedule_round, verify_schedule


class InputError(Exception):
    """Bad user input: reported on stderr, exit code 1."""


def _resolve_spec(token: str):
    """A catalog name or a path to a spec file -> (PolySpec, claimed d)."""
    cat = catalog()
    if token in cat:
        return cat[token]
    path = Path(token)
    if not path.exists():
        raise InputError(
            f"{token!r} is neither a catalog code {sorted(cat)} nor a file")
    try:
        return load_spec(path)
    except SpecParseError as e:
        raise InputError(f"{token}: {e}") from None


def _out_dir(args, command: str) -> Path:
    name = args.name or time.strftime("%Y%m%d-%H%M%S")
    out = Path(args.out_root) / command / name
    if out.exists():
        raise InputError(f"output directory {out} already exists; "
                         "pick another --name")
    out.mkdir(parents=True)
    return out


def _write_manifest(out: Path, args, inputs: list) -> None:
    payload = {
        "command": args.command,
        "inputs": [str(x) for x in inputs],
        "seed": getattr(args, "seed", None),
        "out_dir": str(out),
        "version": __version__,
        "argv": sys.argv[1:],
    }
    (out / "manifest.json").write_text(json.dumps(payload, indent=1) + "\n")


def _emit(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text)
    print(f"wrote {out / name}")


# -- subcommands ------------------------------------------------------------


def cmd_code(args) -> int:
    out = _out_dir(args, "code")
    lines = []
    for token in args.spec:
        spec, d = _resolve_spec(token)
        code = build_code(spec)
        # mixed x,y terms need 4 movement steps, all others are listed
        # as 2 (the wrapped variants of a pure term; a constant term's
        # single variant is folded into the same class)
        steps = sorted({4 if (t.p > 0 and t.q > 0) else 2
                        for t in spec.a + spec.b})
        steps_txt = " or ".join(str(s) for s in steps)
        w = len(spec.a) + len(spec.b)
        d_txt = str(d) if d is not None else "?"
        line = (f"{spec.name or token}: n={code.n} k={code.k} w={w} "
                f"d={d_txt} steps={steps_txt}")
        print(line)
        lines.append(line)
    _write_manifest(out, args, args.spec)
    _emit(out, "report.txt", "\n".join(lines) + "\n")
    return 0


def cmd_layout(args) -> int:
    spec, _ = _resolve_spec(args.spec)
    out = _out_dir(args, "layout")
    lmap = layout(spec, variant=args.variant)
    path = out / "layout.csv"
    with open(path, "w", newline="") as fh:
        dump_csv(lmap, fh)
    print(f"{spec.name or args.spec}: {len(lmap.positions)} atoms on a "
          f"{2 * spec.l} x {2 * spec.m} site grid ({args.variant})")
    _write_manifest(out, args, [args.spec])
    print(f"wrote {path}")
    return 0


def cmd_schedule(args) -> int:
    spec, _ = _resolve_spec(args.spec)
    out = _out_dir(args, "schedule")
    sched = schedule_round(spec, ordering=args.ordering)
    code = build_code(spec)
    report = verify_schedule(sched, code, layout(spec))
    if not report.ok:
        print(f"schedule verification FAILED: {report.message}",
              file=sys.stderr)
        return 2
    print(f"{spec.name or args.spec}: round = {sched.round_time_us / 1000:.4f} ms "
          f"({sched.n_pulses} pulses), verified against the check matrices")
    _write_manifest(out, args, [args.spec])
    _emit(out, "schedule.json", sched.to_json() + "\n")
    return 0


def cmd_cost_table(args) -> int:
    out = _out_dir(args, "cost-table")
    rows = []
    for token in args.spec:
        spec, d = _resolve_spec(token)
        if d is None:
            raise InputError(f"{token}: cost table needs the code distance "
                             "(d = ...) to form cycles")
        sched = schedule_round(spec)
        rows.append({
            "code": spec.name or token,
            "round_ms": sched.round_time_us / 1000.0,
            "rounds_per_cycle": d,
            "cycle_ms": cycle_time(sched, d) / 1000.0,
        })
    header = ["code", "round (ms)", "rounds/cycle", "cycle (ms)"]
    with open(out / "cost_table.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([r["code"], f"{r['round_ms']:.4f}",
                        r["rounds_per_cycle"], f"{r['cycle_ms']:.4f}"])
    _write_manifest(out, args, args.spec)
    if args.json:
        # keep stdout pipe-clean: the JSON rows are the whole output
        print(json.dumps(rows, indent=1))
        return 0
    print(f"{'code':<14} {'round (ms)':>10} {'rounds/cycle':>13} "
          f"{'cycle (ms)':>10}")
    for r in rows:
        print(f"{r['code']:<14} {r['round_ms']:>10.4f} "
              f"{r['rounds_per_cycle']:>13d} {r['cycle_ms']:>10.4f}")
    print(f"wrote {out / 'cost_table.csv'}")
    return 0


def _build_model(token: str, p: float, t_coherence: float, rounds: int,
                 basis: str):
    spec, _ = _resolve_spec(token)
    code = build_code(spec)
    sched = schedule_round(spec)
    noise = NoiseParams(p=p, t_coherence_s=t_coherence, basis=basis)
    circ = build_memory_circuit(code, sched, noise, rounds=rounds)
    return spec, build_detector_model(circ, code)


def cmd_simulate(args) -> int:
    out = _out_dir(args, "simulate")
    spec, model = _build_model(args.spec, args.p, args.t_coherence,
                               args.rounds, args.basis)
    decoder = SplitDecoder(model, DecoderConfig(max_iters=args.max_iters))
    stop = {"max_shots": args.max_shots, "min_errors": args.min_errors}
    res = adaptive_run(model, decoder, stop, seed=args.seed)
    lo, hi = res.confidence
    print(f"{spec.name or args.spec} p={args.p:g} rounds={args.rounds}: "
          f"p_L/round = {res.p_L_per_round:.3e} "
          f"[{lo:.3e}, {hi:.3e}] 95% CI "
          f"({res.errors} errors / {res.shots} shots)")
    _write_manifest(out, args, [args.spec])
    append_result_csv(out / "results.csv", spec.name or args.spec, args.p,
                      args.t_coherence, res, args.seed)
    print(f"wrote {out / 'results.csv'}")
    return 0


def cmd_decode_bench(args) -> int:
    out = _out_dir(args, "decode-bench")
    spec, model = _build_model(args.spec, args.p, args.t_coherence,
                               args.rounds, args.basis)
    decoder = SplitDecoder(model, DecoderConfig(max_iters=args.max_iters))
    batch = sample(model, args.shots, args.seed)
    syn = batch.syndromes()
    active = syn.any(axis=1)
    t0 = time.perf_counter()
    n_converged = 0
    n_osd = 0
    for row in syn[active]:
        res = decoder.decode(row)
        n_converged += res.converged
        n_osd += res.used_osd
    dt = time.perf_counter() - t0
    n_active = int(active.sum())
    rate = n_active / dt if dt > 0 else float("inf")
    lines = [
        f"code = {spec.name or args.spec}",
        f"p = {args.p:g}",
        f"rounds = {args.rounds}",
        f"shots = {args.shots}",
        f"nonzero syndromes = {n_active}",
        f"bp converged = {n_converged}",
        f"used osd = {n_osd}",
        f"decode rate (syndromes/s) = {rate:.1f}",
    ]
    print("\n".join(lines))
    _write_manifest(out, args, [args.spec])
    _emit(out, "bench.txt", "\n".join(lines) + "\n")
    return 0


def _load_program(token: str):
    if ":" in token or token in fixtures.FIXTURES:
        name, _, n = token.partition(":")
        if name not in fixtures.FIXTURES:
            raise InputError(f"unknown fixture {name!r}; "
                             f"have {sorted(fixtures.FIXTURES)}")
        return fixtures.FIXTURES[name](int(n) if n else 16)
    path = Path(token)
    if not path.exists():
        raise InputError(f"{token!r} is neither a fixture nor a file")
    try:
        return parse_program(path.read_text())
    except ValueError as e:
        raise InputError(f"{token}: {e}") from None


def _load_arch(args):
    if args.arch:
        path = Path(args.arch)
        if not path.exists():
            raise InputError(f"arch config {args.arch!r} not found")
        return load_arch_config(path)
    return arch_from_catalog("gb144_12_12", n_blocks=4, n_surface=4,
                             surface_d=11)


def cmd_compile(args) -> int:
    out = _out_dir(args, "compile")
    prog = _load_program(args.program)
    cfg = _load_arch(args)
    try:
        if args.baseline:
            cp = compile_baseline(prog, cfg)
        else:
            assignment = map_qubits(prog, cfg.n_blocks, cfg.memory_k)
            cp = schedule_program(prog, assignment, cfg)
    except (ValueError, RuntimeError) as e:
        raise InputError(f"cannot compile onto this architecture: {e}") \
            from None
    rep = cost_report(cp)
    mode = "baseline" if args.baseline else "hierarchical"
    print(f"{mode}: {cp.n_cycles} logical cycles = {rep.time_seconds:.3f} s, "
          f"{rep.space_qubits} qubits, "
          f"{rep.spacetime_qubit_seconds:.1f} qubit-seconds")
    print("breakdown (qubit-seconds): "
          + ", ".join(f"{k}={v:.1f}" for k, v in rep.breakdown.items()))
    _write_manifest(out, args, [args.program, args.arch or "<default>"])
    _emit(out, "timeline.json", cp.timeline_json() + "\n")
    with open(out / "cost.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "space (qubits)", "time (s)",
                    "spacetime (qubit-seconds)",
                    *(f"{k} (qubit-seconds)" for k in rep.breakdown)])
        w.writerow([mode, rep.space_qubits, rep.time_seconds,
                    rep.spacetime_qubit_seconds, *rep.breakdown.values()])
    print(f"wrote {out / 'cost.csv'}")
    return 0


def cmd_sweep(args) -> int:
    out = _out_dir(args, "sweep")
    prog = _load_program(args.program)
    cfg = _load_arch(args)
    if args.axis == "cnot_mode":
        values = args.values.split(",")
    elif args.axis in ("n_blocks", "n_surface"):
        values = [int(v) for v in args.values.split(",")]
    else:
        values = [float(v) for v in args.values.split(",")]
    try:
        rows = sweep(prog, cfg, args.axis, values)
    except (ValueError, RuntimeError) as e:
        raise InputError(str(e)) from None
    path = out / "sweep.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"{args.axis}", "surface_d", "space (qubits)",
                    "time (s)", "spacetime (qubit-seconds)",
                    "memory (qubit-seconds)", "ldst (qubit-seconds)",
                    "compute (qubit-seconds)", "factory (qubit-seconds)"])
        for r in rows:
            w.writerow([r["value"], r["surface_d"], r["space_qubits"],
                        r["time_s"], r["spacetime_qubit_s"],
                        r["memory_qubit_s"], r["ldst_qubit_s"],
                        r["compute_qubit_s"], r["factory_qubit_s"]])
    for r in rows:
        print(f"{args.axis}={r['value']}: time={r['time_s']:.3f} s, "
              f"space={r['space_qubits']} qubits, "
              f"spacetime={r['spacetime_qubit_s']:.1f} qubit-seconds")
    _write_manifest(out, args, [args.program, args.arch or "<default>"])
    print(f"wrote {path}")
    return 0


# -- argument parsing -------------------------------------------------------


def _add_common(sp, seed_default=None):
    sp.add_argument("--name", default=None,
                    help="output directory name (default: timestamp)")
    sp.add_argument("--out-root", default="out",
                    help="root directory for outputs (default: out)")
    if seed_default is not None:
        sp.add_argument("--seed", type=int, default=seed_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gbmem",
        description="Generalized-bicycle code memories: construction, "
                    "movement schedules, logical error rates, and "
                    "hierarchical compilation.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("code", help="build codes and report n, k, w, d")
    sp.add_argument("spec", nargs="+",
                    help="catalog name or spec file path")
    _add_common(sp)
    sp.set_defaults(func=cmd_code)

    sp = sub.add_parser("layout", help="emit the atom-grid layout CSV")
    sp.add_argument("spec")
    sp.add_argument("--variant", default="standard",
                    choices=["standard", "collision-free"])
    _add_common(sp)
    sp.set_defaults(func=cmd_layout)

    sp = sub.add_parser("schedule",
                        help="synthesize and verify a movement schedule")
    sp.add_argument("spec")
    sp.add_argument("--ordering", default="optimal",
                    choices=["optimal", "heuristic"])
    _add_common(sp)
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser("cost-table",
                        help="round/cycle movement costs per code")
    sp.add_argument("spec", nargs="+")
    sp.add_argument("--json", action="store_true",
                    help="print rows as JSON")
    _add_common(sp)
    sp.set_defaults(func=cmd_cost_table)

    sp = sub.add_parser("simulate",
                        help="Monte Carlo logical error rate for a memory")
    sp.add_argument("spec")
    sp.add_argument("--p", type=float, required=True,
                    help="physical error rate")
    sp.add_argument("--t-coherence", type=float, default=10.0,
                    help="coherence time in seconds (default 10)")
    sp.add_argument("--rounds", type=int, required=True,
                    help="parity-check rounds per shot")
    sp.add_argument("--basis", default="Z", choices=["Z", "X"])
    sp.add_argument("--max-shots", type=int, default=100000)
    sp.add_argument("--min-errors", type=int, default=100)
    sp.add_argument("--max-iters", type=int, default=50,
                    help="BP iteration cap")
    _add_common(sp, seed_default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("decode-bench",
                        help="decoder throughput and convergence stats")
    sp.add_argument("spec")
    sp.add_argument("--p", type=float, default=1e-3)
    sp.add_argument("--t-coherence", type=float, default=10.0)
    sp.add_argument("--rounds", type=int, default=2)
    sp.add_argument("--basis", default="Z", choices=["Z", "X"])
    sp.add_argument("--shots", type=int, default=2000)
    sp.add_argument("--max-iters", type=int, default=50)
    _add_common(sp, seed_default=0)
    sp.set_defaults(func=cmd_decode_bench)

    sp = sub.add_parser("compile",
                        help="compile a Clifford+T program onto the "
                             "hierarchical architecture")
    sp.add_argument("program",
                    help="program file, or fixture name[:width] from "
                         + "/".join(sorted(fixtures.FIXTURES)))
    sp.add_argument("--arch", default=None,
                    help="architecture config file (INI); default: "
                         "4 blocks of gb144_12_12, 4 slots, d=11")
    sp.add_argument("--baseline", action="store_true",
                    help="compile onto the surface-code-only baseline")
    _add_common(sp)
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("sweep", help="recompile across one axis")
    sp.add_argument("program")
    sp.add_argument("--arch", default=None)
    sp.add_argument("--axis", required=True,
                    choices=["ldst_multiplier", "target_fidelity",
                             "n_blocks", "n_surface", "cnot_mode"])
    sp.add_argument("--values", required=True,
                    help="comma-separated axis values")
    _add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; those are input errors here,
        # while --help's exit 0 passes through
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # internal assertion
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
