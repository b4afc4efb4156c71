"""Command-line front end: ``cvsim teleport|qnd|cluster|run``.

Exit codes: 0 success, 2 usage error, 3 unphysical parameters, 4 circuit parse
or compile failure, 5 Monte-Carlo oracle disagreement.
"""

from __future__ import annotations

import argparse
import os
import re
import sys

import numpy as np

from . import circuits, cluster, protocols
from .dsl import CircuitCompileError, CircuitParseError, compile_program, parse
from .elements import EprParams
from .gaussian import (
    GaussianState,
    LinearProcess,
    NonCanonicalError,
    QuadratureForm,
    UnitsConvention,
    UnphysicalStateError,
    coherent,
    fidelity,
    form_stats,
    linear_process,
    squeezed_vacuum,
    tensor,
    vacuum,
)
from .montecarlo import TrajectoryConfig, run_trajectories
from .report import Report, state_entry, variance_entry, verdict

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNPHYSICAL = 3
EXIT_PARSE = 4
EXIT_ORACLE = 5


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _db_to_var(values):
    return [10.0 ** (v / 10.0) for v in values]


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CVSIM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"CVSIM_SEED must be an integer, got {env!r}") from None


def _oracle(plan, analytic: GaussianState, args) -> dict:
    cfg = TrajectoryConfig(n_samples=args.samples, seed=_seed(args))
    m = run_trajectories(plan, cfg=cfg)
    z = m.max_z(analytic)
    return {
        "n_samples": cfg.n_samples,
        "seed": cfg.seed,
        "max_z": z,
        "tolerance_sigmas": cfg.tolerance_sigmas,
        "agrees": bool(z <= cfg.tolerance_sigmas),
        "empirical_cov": m.cov.tolist(),
    }


# --- teleport -------------------------------------------------------------


def _input_state(spec: list[str]) -> tuple[GaussianState, str]:
    kind, *vals = spec
    try:
        nums = [float(v) for v in vals]
    except ValueError:
        raise UsageError(f"--input values must be numbers: {vals}") from None
    if kind == "coherent" and len(nums) == 2:
        return coherent(*nums), circuits.source("coherent", *nums)
    if kind == "squeezed" and len(nums) == 2:
        return squeezed_vacuum(nums[0], nums[1]), circuits.source("squeezed", nums[0], nums[1], 0.0)
    if kind == "vacuum" and not nums:
        return vacuum(1), "vacuum"
    raise UsageError("--input expects 'coherent X P', 'squeezed VSQ VANTI' or 'vacuum'")


def _broadcast(values, n, name):
    if values is None:
        return [None] * n
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise UsageError(f"{name} needs 1 or {n} values, got {len(values)}")
    return values


def cmd_teleport(args) -> tuple[Report, int]:
    units = UnitsConvention(args.units)
    vsq = _db_to_var(args.db) if args.db is not None else (args.vsq or [1.0])
    hops = len(vsq) if args.hops is None else args.hops
    if hops < 1:
        raise UsageError("--hops must be at least 1")
    vsq = _broadcast(vsq, hops, "--vsq/--db")
    vanti = _broadcast(args.vanti, hops, "--vanti")
    eprs = [EprParams(v, v, a, a) for v, a in zip(vsq, vanti)]
    state, src = _input_state(args.input)
    cfgs = [protocols.TeleportConfig(e) for e in eprs]
    out = protocols.teleport_sequential(state, cfgs)
    pure = np.isclose(state.purity, 1.0)

    per_hop = []
    for e, cfg in zip(eprs, cfgs):
        hop = {"v_sq": variance_entry(e.v_sq_x, units)}
        if pure:
            hop["fidelity"] = fidelity(state, protocols.teleport(state, cfg))
        per_hop.append(hop)
    results = {"hops": per_hop, "output": state_entry(out, units)}
    if pure:
        results["fidelity"] = fidelity(state, out)
        results["classical_limit"] = verdict(results["fidelity"], 0.5, ">")
    vx = state.cov[0, 0]
    if vx < 1.0:
        results["squeezing_preserved"] = verdict(units.variance(out.cov[0, 0]), units.variance(1.0), "<")
    params = {"input": " ".join(args.input), "hops": hops, "v_sq": vsq}
    report = Report("teleport", params, results, units, _seed(args))
    if args.mc:
        plan = compile_program(parse(circuits.teleport_circuit(src, eprs)))
        report.oracle = _oracle(plan, out, args)
    return report, _oracle_code(report)


# --- qnd ------------------------------------------------------------------


def _qnd_block(r: protocols.QndReport, q: str, units) -> dict:
    t_s, t_m = getattr(r, f"t_s_{q}"), getattr(r, f"t_m_{q}")
    v_cond = getattr(r, f"v_cond_{q}")
    return {
        "t_s": t_s,
        "t_m": t_m,
        "transfer_sum": verdict(t_s + t_m, 1.0, ">"),
        "v_cond": variance_entry(v_cond, units),
        "v_cond_below_vacuum": verdict(units.variance(v_cond), units.variance(1.0), "<"),
        "k_cond": getattr(r, f"k_cond_{q}"),
    }


def cmd_qnd(args) -> tuple[Report, int]:
    units = UnitsConvention(args.units)
    R = args.R
    if not 0.0 < R < 1.0:
        raise UnphysicalStateError(f"reflectance must lie in (0, 1), got {R}")
    G = protocols.interaction_gain(R)
    if args.calibrate is not None:
        v_sq = protocols.calibrate_qnd_ancilla(args.calibrate, R)
    elif args.ancilla_db is not None:
        v_sq = 10.0 ** (args.ancilla_db / 10.0)
    else:
        v_sq = args.ancilla_vsq
    A = args.amplitude
    s1 = coherent(A, 0.0) if args.signal == "x" else vacuum(1)
    s2 = coherent(0.0, A) if args.signal == "p" else vacuum(1)
    inputs = (circuits.source("coherent", *s1.mean), circuits.source("coherent", *s2.mean))

    if args.ideal:
        op = protocols.qnd_ideal(G)
        out = linear_process(LinearProcess(op.S, op.d), tensor(s1, s2))
        text = "\n".join(["cvc 1", f"mode s1 {inputs[0]}", f"mode s2 {inputs[1]}", f"qnd s1 s2 G={float(G)!r}"]) + "\n"
    else:
        anc_a = squeezed_vacuum(v_sq, args.vanti, 0.0)  # validates the ancilla
        out = linear_process(protocols.qnd_offline_squeezed(v_sq, args.vanti, R), tensor(s1, s2))
        vanti = anc_a.cov[1, 1]
        text = circuits.qnd_offline_circuit(v_sq, vanti, R, inputs)
    r = protocols.qnd_criteria(out, (1.0, 1.0), G)
    d = r.duan
    results = {
        "interaction_gain": G,
        "signal": args.signal,
        "criteria": _qnd_block(r, args.signal, units),
        "duan": {"k": d.k, "lhs_x": d.lhs_x, "lhs_p": d.lhs_p, "entangled": verdict(d.ratio, 1.0, "<")},
        "output": state_entry(out, units),
    }
    params = {"R": R, "ideal": bool(args.ideal), "ancilla_v_sq": None if args.ideal else v_sq, "amplitude": A}
    report = Report("qnd", params, results, units, _seed(args))
    if args.mc:
        report.oracle = _oracle(compile_program(parse(text)), out, args)
    return report, _oracle_code(report)


# --- cluster --------------------------------------------------------------


def cmd_cluster(args) -> tuple[Report, int]:
    units = UnitsConvention(args.units)
    v_sq = 10.0 ** (args.db / 10.0) if args.db is not None else args.vsq
    state = cluster.build_cluster(args.shape, v_sq, args.vanti)
    g = cluster.PRESETS[args.shape]
    table = [
        {"form": row.label, "variance": variance_entry(row.variance, units, row.vacuum_variance)}
        for row in cluster.nullifier_table(state, g)
    ]
    results = {"nullifiers": table}
    if args.shape == "linear":
        ins = cluster.inseparability_check(state)
        results["inseparability"] = {
            "sums": [verdict(units.variance(s), units.variance(ins.bound), "<") for s in ins.sums],
            "fully_inseparable": ins.fully_inseparable,
        }
    params = {"shape": args.shape, "v_sq": v_sq, "v_sq_db": 10.0 * np.log10(v_sq)}
    report = Report("cluster", params, results, units, _seed(args))
    if args.mc:
        plan = compile_program(parse(circuits.cluster_circuit(args.shape, v_sq, args.vanti)))
        report.oracle = _oracle(plan, state, args)
    return report, _oracle_code(report)


# --- run ------------------------------------------------------------------

_TERM = re.compile(r"\s*([+-])?\s*(\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*([xp]\d+)\s*")


def parse_form(text: str, n_modes: int) -> QuadratureForm:
    """Parse ``p1-x2+0.5x3`` style forms over the output modes (1-based)."""
    terms: dict[str, float] = {}
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos or (pos > 0 and not m.group(1)):
            raise UsageError(f"cannot parse form {text!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        terms[m.group(3)] = terms.get(m.group(3), 0.0) + sign * coef
        pos = m.end()
    if not terms:
        raise UsageError("empty form")
    try:
        return QuadratureForm.from_terms(n_modes, **terms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_run(args) -> tuple[Report, int]:
    units = UnitsConvention(args.units)
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    plan = compile_program(parse(text))
    out = plan.run()
    results = {"outputs": list(plan.outputs), "output": state_entry(out, units)}
    forms = []
    for f in args.form or []:
        qf = parse_form(f, out.n_modes)
        mean, var = form_stats(out, qf)
        forms.append({"form": f, "mean": float(units.amplitude(mean)), "variance": variance_entry(var, units)})
    if forms:
        results["forms"] = forms
    report = Report("run", {"file": str(args.file)}, results, units, _seed(args))
    if args.mc:
        report.oracle = _oracle(plan, out, args)
    return report, _oracle_code(report)


def _oracle_code(report: Report) -> int:
    if report.oracle is not None and not report.oracle["agrees"]:
        return EXIT_ORACLE
    return EXIT_OK


# --- entry point ----------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="machine-readable report")
    fmt.add_argument("--csv", action="store_true", help="one row per scalar result")
    p.add_argument("--mc", action="store_true", help="cross-check with Monte-Carlo trajectories")
    p.add_argument("--seed", type=int, default=None, help="oracle seed (default: $CVSIM_SEED or 0)")
    p.add_argument("--samples", type=int, default=100_000, help="oracle trajectories")
    p.add_argument(
        "--units", type=float, default=1.0, choices=(1.0, 0.5, 0.25),
        help="vacuum variance used for reported linear values",
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvsim", description="Gaussian continuous-variable experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("teleport", help="single or sequential teleportation")
    sq = t.add_mutually_exclusive_group()
    sq.add_argument("--vsq", type=_float_list, help="EPR squeezing variance per hop (comma list)")
    sq.add_argument("--db", type=_float_list, help="EPR squeezing in dB per hop (comma list)")
    t.add_argument("--vanti", type=_float_list, help="anti-squeezed variance per hop (default pure)")
    t.add_argument("--input", nargs="+", default=["coherent", "0", "0"], metavar="SPEC")
    t.add_argument("--hops", type=int, default=None)
    _common(t)
    t.set_defaults(func=cmd_teleport)

    q = sub.add_parser("qnd", help="offline QND gate criteria")
    q.add_argument("--R", type=float, default=protocols.UNITY_GAIN_REFLECTANCE, help="beam-splitter reflectance")
    anc = q.add_mutually_exclusive_group()
    anc.add_argument("--ancilla-vsq", type=float, default=1.0)
    anc.add_argument("--ancilla-db", type=float, default=None)
    anc.add_argument("--calibrate", type=float, default=None, metavar="V_COND", help="solve for the ancilla")
    anc.add_argument("--ideal", action="store_true", help="infinitely squeezed ancillas")
    q.add_argument("--vanti", type=float, default=None)
    q.add_argument("--signal", choices=("x", "p"), default="x")
    q.add_argument("--amplitude", type=float, default=0.0, help="coherent amplitude on the signal quadrature")
    _common(q)
    q.set_defaults(func=cmd_qnd)

    c = sub.add_parser("cluster", help="four-mode cluster states")
    c.add_argument("--shape", choices=tuple(cluster.PRESETS), default="linear")
    cs = c.add_mutually_exclusive_group()
    cs.add_argument("--vsq", type=float, default=1.0)
    cs.add_argument("--db", type=float, default=None)
    c.add_argument("--vanti", type=float, default=None)
    _common(c)
    c.set_defaults(func=cmd_cluster)

    r = sub.add_parser("run", help="execute a .cvc circuit file")
    r.add_argument("file")
    r.add_argument("--form", action="append", help="report statistics of a quadrature form, e.g. p1-x2")
    _common(r)
    r.set_defaults(func=cmd_run)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.samples < 1000:
            raise UsageError("--samples must be at least 1000")
        report, code = args.func(args)
    except UsageError as exc:
        print(f"cvsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnphysicalStateError, NonCanonicalError) as exc:
        print(f"cvsim: unphysical parameters: {exc}", file=sys.stderr)
        return EXIT_UNPHYSICAL
    except CircuitParseError as exc:
        where = getattr(args, "file", "<generated>")
        for d in exc.diagnostics:
            print(f"{where}:{d}", file=sys.stderr)
        return EXIT_PARSE
    except CircuitCompileError as exc:
        print(f"{getattr(args, 'file', '<generated>')}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.json:
        sys.stdout.write(report.to_json() + "\n")
    elif args.csv:
        sys.stdout.write(report.to_csv())
    else:
        sys.stdout.write(report.to_text())
        if report.oracle is not None:
            o = report.oracle
            status = "agrees" if o["agrees"] else "DISAGREES"
            print(f"  oracle: max z = {o['max_z']:.3f} over {o['n_samples']} trajectories ({status})")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
