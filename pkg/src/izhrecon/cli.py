"""Command-line workflow: generate -> reconstruct -> evaluate -> plotdata.

Exit codes: 0 success, 2 invalid arguments or unreadable/inconsistent
inputs, 3 network generation exhausted its retries without finding a
spiking network, 4 reconstruction failed for at least one neuron (partial
results are still written).

All randomness is seeded and single-streamed, so any command given the
same inputs and seed writes byte-identical files.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as iz_io
from . import model as iz_model
from . import reconstruct as iz_recon
from .ga import GAConfig
from .model import (
    DEFAULT_RANGES,
    DEFAULT_WEIGHT_RANGE,
    INTRINSICALLY_BURSTING,
    PARAMETER_NAMES,
    NetworkModel,
    SimulationConfig,
    TraceMatrix,
)
from .weights import assemble_system, residual_mse

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_SPIKING_NETWORK = 3
EXIT_DEGRADED = 4


def _fail(message: str, code: int = EXIT_USAGE) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_generate(args: argparse.Namespace) -> int:
    if args.steps < 2:
        return _fail("--steps must be at least 2")

    if args.model is not None:
        try:
            truth = iz_io.read_model_json(args.model)
        except (OSError, ValueError) as exc:
            return _fail(str(exc))
        n = truth.n
        params, dt = truth.params, truth.dt
    else:
        if args.neurons is None:
            return _fail("either --neurons or --model is required")
        n = args.neurons
        if n < 1:
            return _fail("--neurons must be positive")
        params, dt = [INTRINSICALLY_BURSTING] * n, 0.5

    if args.steps < n + 1:
        print(
            f"warning: {args.steps} steps is below the identifiability bound of "
            f"{n + 1} samples for {n} neurons",
            file=sys.stderr,
        )

    if args.model is not None and args.weight_range is None:
        # fixed model: simulate as given, nothing to retry
        model = truth
        trace = iz_model.simulate(
            params, model.weights, SimulationConfig(dt=dt, steps=args.steps)
        )
    else:
        weight_range = tuple(args.weight_range) if args.weight_range else DEFAULT_WEIGHT_RANGE
        if weight_range[0] > weight_range[1]:
            return _fail(f"invalid --weight-range {weight_range}")
        try:
            model, trace = iz_model.random_network(
                n,
                steps=args.steps,
                seed=args.seed,
                dt=dt,
                weight_range=weight_range,
                params=params,
            )
        except RuntimeError as exc:
            return _fail(str(exc), EXIT_NO_SPIKING_NETWORK)

    iz_io.write_trace_csv(f"{args.out_prefix}.traces.csv", trace)
    iz_io.write_model_json(f"{args.out_prefix}.truth.json", model)
    counts = trace.spike_counts()
    print(f"wrote {args.out_prefix}.traces.csv ({trace.steps} steps, {n} neurons)")
    print(f"wrote {args.out_prefix}.truth.json")
    print("spike counts: " + " ".join(f"n{j}={int(c)}" for j, c in enumerate(counts)))
    return EXIT_OK


def _report_json(
    results: list[iz_recon.NeuronResult],
    max_abs_weight_error: float | None,
) -> str:
    import json

    doc = {
        "neurons": [
            {
                "index": res.index,
                "status": "ok" if res.ok else "failed",
                "mse": res.mse,
                "usable_transitions": res.usable_transitions,
                "params": {name: getattr(res.params, name) for name in PARAMETER_NAMES},
            }
            for res in results
        ],
    }
    if max_abs_weight_error is not None:
        doc["max_abs_weight_error"] = max_abs_weight_error
    return json.dumps(doc, indent=2) + "\n"


def _history_csv(results: list[iz_recon.NeuronResult]) -> str:
    lines = ["neuron,generation,best_mse,mean_mse,a,b,c,d,u0"]
    for res in results:
        if res.history is None:
            continue
        h = res.history
        for g in range(len(h)):
            p = h.best_params[g]
            fields = [str(res.index), str(g), repr(h.best_error[g]), repr(h.mean_error[g])]
            fields.extend(repr(getattr(p, name)) for name in PARAMETER_NAMES)
            lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def cmd_reconstruct(args: argparse.Namespace) -> int:
    try:
        trace = iz_io.read_trace_csv(args.traces)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    if args.known_params is not None:
        return _reconstruct_known(args, trace)

    settings = iz_io.ReconstructionSettings(ga=GAConfig())
    if args.ga_config is not None:
        try:
            settings = iz_io.load_ga_config(args.ga_config)
        except (OSError, ValueError) as exc:
            return _fail(str(exc))

    model, report = iz_recon.reconstruct_network(
        trace, settings.ga, fix_u0=settings.fix_u0, warmup_steps=settings.warmup_steps
    )
    iz_io.write_model_json(f"{args.out}.model.json", model)
    iz_io.atomic_write_text(f"{args.out}.report.json", _report_json(report.neurons, None))
    iz_io.atomic_write_text(f"{args.out}.history.csv", _history_csv(report.neurons))
    for res in report.neurons:
        print(
            f"neuron {res.index}: mse {res.mse!r} "
            f"({res.usable_transitions} usable transitions, "
            f"{'ok' if res.ok else 'FAILED'})"
        )
    print(f"wall clock: {report.wall_clock_s:.2f} s")
    print(f"wrote {args.out}.model.json, {args.out}.report.json, {args.out}.history.csv")
    return EXIT_OK if report.ok else EXIT_DEGRADED


def _reconstruct_known(args: argparse.Namespace, trace: TraceMatrix) -> int:
    try:
        known = iz_io.read_model_json(args.known_params)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if known.n != trace.n:
        return _fail(f"model has {known.n} neurons but trace has {trace.n}")
    if known.dt != trace.dt:
        return _fail(f"model dt {known.dt} does not match trace dt {trace.dt}")

    results = []
    W = np.zeros((trace.n, trace.n))
    from .model import recover_u_trace
    from .weights import InsufficientDataError, SingularSystemError, solve_normal_equations

    failed = False
    for i in range(trace.n):
        rec = recover_u_trace(trace, i, known.params[i])
        usable = int(np.count_nonzero(rec.usable))
        try:
            system = assemble_system(trace, rec, i, trace.dt)
            rep = solve_normal_equations(system)
            W[i] = rep.w
            results.append(
                iz_recon.NeuronResult(
                    index=i,
                    params=known.params[i],
                    weight_row=rep.w,
                    mse=rep.mse,
                    history=None,
                    usable_transitions=usable,
                )
            )
        except (InsufficientDataError, SingularSystemError) as exc:
            failed = True
            print(f"neuron {i}: {exc}", file=sys.stderr)
            results.append(
                iz_recon.NeuronResult(
                    index=i,
                    params=known.params[i],
                    weight_row=None,
                    mse=iz_recon.FAILED_FITNESS,
                    history=None,
                    usable_transitions=usable,
                )
            )

    model = NetworkModel(params=known.params, weights=W, dt=trace.dt)
    weight_err = float(np.max(np.abs(W - known.weights)))
    iz_io.write_model_json(f"{args.out}.model.json", model)
    iz_io.atomic_write_text(
        f"{args.out}.report.json", _report_json(results, weight_err)
    )
    for res in results:
        print(
            f"neuron {res.index}: mse {res.mse!r} "
            f"({res.usable_transitions} usable transitions, "
            f"{'ok' if res.ok else 'FAILED'})"
        )
    print(f"max abs weight error vs {args.known_params}: {weight_err!r}")
    print(f"wrote {args.out}.model.json, {args.out}.report.json")
    return EXIT_DEGRADED if failed else EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        truth = iz_io.read_model_json(args.truth)
        recon = iz_io.read_model_json(args.recon)
        metrics = iz_recon.evaluate_model(truth, recon, horizon=args.horizon)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    print(f"max abs weight error: {metrics.max_abs_weight_error!r}")
    for name in PARAMETER_NAMES:
        print(f"max abs {name} error: {metrics.param_errors[name]!r}")
    if metrics.trajectory_mse is not None:
        print(f"trajectory mse over {args.horizon} steps: {metrics.trajectory_mse!r}")

    lines = ["metric,value", f"max_abs_weight_error,{metrics.max_abs_weight_error!r}"]
    lines.extend(
        f"max_abs_{name}_error,{metrics.param_errors[name]!r}" for name in PARAMETER_NAMES
    )
    if metrics.trajectory_mse is not None:
        lines.append(f"trajectory_mse,{metrics.trajectory_mse!r}")
    out = args.out if args.out else args.recon.removesuffix(".json") + ".metrics.csv"
    iz_io.atomic_write_text(out, "\n".join(lines) + "\n")
    print(f"wrote {out}")
    return EXIT_OK


def _read_history_csv(path: str) -> list[dict]:
    import csv

    with open(path) as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise ValueError(f"{path}: empty history file")
    return rows


def cmd_plotdata(args: argparse.Namespace) -> int:
    try:
        if args.kind in ("fitness", "params"):
            if args.report is None:
                return _fail(f"--report is required for --kind {args.kind}")
            rows = [
                r for r in _read_history_csv(args.report) if int(r["neuron"]) == args.neuron
            ]
            if not rows:
                return _fail(f"no history rows for neuron {args.neuron} in {args.report}")
            if args.kind == "fitness":
                lines = ["generation,best_mse,mean_mse"]
                lines.extend(
                    f"{r['generation']},{r['best_mse']},{r['mean_mse']}" for r in rows
                )
            else:
                lines = ["generation,a,b,c,d,u0"]
                lines.extend(
                    "{},{},{},{},{},{}".format(
                        r["generation"], r["a"], r["b"], r["c"], r["d"], r["u0"]
                    )
                    for r in rows
                )
        elif args.kind == "surface":
            if args.traces is None or args.truth is None:
                return _fail("--traces and --truth are required for --kind surface")
            trace = iz_io.read_trace_csv(args.traces)
            truth = iz_io.read_model_json(args.truth)
            if args.neuron >= trace.n:
                return _fail(f"neuron {args.neuron} out of range for {trace.n}-neuron trace")
            p = truth.params[args.neuron]
            a_values = np.linspace(*DEFAULT_RANGES.a, args.grid)
            b_values = np.linspace(*DEFAULT_RANGES.b, args.grid)
            surface = iz_recon.error_surface(
                trace, args.neuron, a_values, b_values, c=p.c, d=p.d, u0=p.u0
            )
            fmt = iz_io.fmt_float
            lines = ["a,b,mse"]
            for ai, a in enumerate(a_values):
                lines.extend(
                    f"{fmt(a)},{fmt(b)},{fmt(surface[ai, bi])}" for bi, b in enumerate(b_values)
                )
        elif args.kind == "trajectory":
            if args.truth is None or args.recon is None:
                return _fail("--truth and --recon are required for --kind trajectory")
            truth = iz_io.read_model_json(args.truth)
            recon = iz_io.read_model_json(args.recon)
            if truth.n != recon.n or truth.dt != recon.dt:
                return _fail("truth and reconstruction dimensions differ")
            cfg = SimulationConfig(dt=truth.dt, steps=args.horizon)
            r_truth = iz_model.simulate(truth.params, truth.weights, cfg).r
            r_recon = iz_model.simulate(recon.params, recon.weights, cfg).r
            fmt = iz_io.fmt_float
            header = ["t_ms"]
            for j in range(truth.n):
                header.extend([f"v{j}_truth", f"v{j}_recon"])
            lines = [",".join(header)]
            for t in range(args.horizon):
                fields = [fmt(t * truth.dt)]
                for j in range(truth.n):
                    fields.extend([fmt(r_truth[t, j]), fmt(r_recon[t, j])])
                lines.append(",".join(fields))
        else:  # pragma: no cover - argparse restricts the choices
            return _fail(f"unknown kind {args.kind}")
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc))

    iz_io.atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(lines) - 1} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="izhrecon",
        description=(
            "Simulate Izhikevich spiking networks and reconstruct cell parameters "
            "and synaptic weights from membrane-potential traces."
        ),
        epilog=(
            "exit codes: 0 ok, 2 invalid arguments or inputs, "
            "3 no spiking network found, 4 reconstruction degraded"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a network and write trace + ground truth")
    g.add_argument("--neurons", type=int, default=None, help="neuron count (random-network mode)")
    g.add_argument("--steps", type=int, required=True, help="number of recorded samples")
    g.add_argument("--seed", type=int, default=0, help="weight-draw seed")
    g.add_argument("--model", default=None, help="simulate this model file instead of a random network")
    g.add_argument(
        "--weight-range",
        type=float,
        nargs=2,
        metavar=("LO", "HI"),
        default=None,
        help=f"uniform weight interval (default {DEFAULT_WEIGHT_RANGE}); with --model forces a redraw",
    )
    g.add_argument("--out-prefix", required=True, help="output prefix for .traces.csv and .truth.json")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("reconstruct", help="recover parameters and weights from a trace")
    r.add_argument("--traces", required=True, help="input trace CSV")
    r.add_argument("--ga-config", default=None, help="GA configuration JSON")
    r.add_argument(
        "--known-params",
        default=None,
        help="model file with the true parameters; skips the GA and fits weights only",
    )
    r.add_argument("--out", required=True, help="output prefix")
    r.set_defaults(func=cmd_reconstruct)

    e = sub.add_parser("evaluate", help="compare a reconstructed model against ground truth")
    e.add_argument("--truth", required=True)
    e.add_argument("--recon", required=True)
    e.add_argument("--horizon", type=int, default=1000, help="resimulation steps (0 to skip)")
    e.add_argument("--out", default=None, help="metrics CSV path (default: <recon>.metrics.csv)")
    e.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plotdata", help="emit CSV datasets for plotting")
    p.add_argument("--kind", required=True, choices=["fitness", "params", "surface", "trajectory"])
    p.add_argument("--report", default=None, help="history CSV from reconstruct (fitness, params)")
    p.add_argument("--traces", default=None, help="trace CSV (surface)")
    p.add_argument("--truth", default=None, help="truth model JSON (surface, trajectory)")
    p.add_argument("--recon", default=None, help="reconstructed model JSON (trajectory)")
    p.add_argument("--neuron", type=int, default=0)
    p.add_argument("--grid", type=int, default=50, help="lattice points per axis (surface)")
    p.add_argument("--horizon", type=int, default=1000, help="steps to resimulate (trajectory)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
