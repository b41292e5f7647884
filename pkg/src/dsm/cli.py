"""Experiment runner: configure a study, run it, emit report and tables.

Five experiment kinds cover the library surface: ``flow`` integrates the
regularized Newton flow and checks the residual decay law plus the gap
bounds, ``iterate`` runs the discrete iteration and the step recursion
check, ``reg-path`` walks a regularization path and checks the
minimal-norm inequalities, ``noise-study`` sweeps noise levels against
the perturbation bounds, and ``lemma-sim`` exercises the scalar
recursion certificates.

Configuration is one JSON file per run; ``--set key=value`` flags
override individual fields and ``--seed`` overrides the seed.  Every run
writes ``report.json`` (fully deterministic for a fixed config and seed:
wall-clock times go to a ``timing.json`` sidecar instead) plus CSV
artifacts, and prints a summary table.  Exit status: 0 when every
enabled bound check passes, 1 when one fails, 2 for invalid
configuration, 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import corpus, flow, iterate, recursion, regroot
from .problem import NumericalFailure, as_vector, inner, norm

__all__ = ["run_experiment", "emit_table", "main"]

KINDS = ("flow", "iterate", "reg-path", "noise-study", "lemma-sim")

# Bound checks are reported under stable names so downstream tooling can
# key on them; each name states what the inequality controls.
CHECK_RESIDUAL_DECAY = "residual-decay"
CHECK_FLOW_LIMIT_GAP = "flow-limit-gap"
CHECK_STOPPING_GAP = "stopping-gap"
CHECK_NORM_DOMINANCE = "norm-dominance"
CHECK_ERROR_INNER_BOUND = "error-inner-bound"
CHECK_NOISY_STOPPING_GAP = "noisy-stopping-gap"
CHECK_NOISE_GAP = "noise-gap"
CHECK_NOISE_CONVERGENCE = "noise-convergence"
CHECK_RECURSION_STEP = "recursion-step"
CHECK_INDUCTION_CHAIN = "induction-chain"

_TINY = 1e-300


def _check(check_id: str, observed: float, bound: float, passed=None) -> dict:
    if passed is None:
        passed = observed <= bound
    return {
        "check": check_id,
        "observed": float(observed),
        "bound": float(bound),
        "margin": float(bound) - float(observed),
        "pass": bool(passed),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _merge_defaults(config: dict, defaults: dict, required: tuple, kind: str) -> dict:
    allowed = set(defaults) | set(required) | {"kind", "seed"}
    unknown = set(config) - allowed
    if unknown:
        raise ValueError(f"unknown config keys for kind {kind!r}: {sorted(unknown)}")
    missing = [k for k in required if k not in config]
    if missing:
        raise ValueError(f"missing config keys for kind {kind!r}: {missing}")
    out = dict(defaults)
    out.update(config)
    out["kind"] = kind
    out.setdefault("seed", 0)
    out["seed"] = int(out["seed"])
    return out


# ---------------------------------------------------------------------------
# flow


def _flow_tables(problem, traj, root_v, slack):
    g0 = float(traj.residuals[0])
    rows = []
    max_dev = 0.0
    max_gap_ratio = 0.0
    for t, u, g in zip(traj.times, traj.states, traj.residuals):
        model = g0 * math.exp(-t)
        dev = abs(g / model - 1.0) if model > 0.0 else (0.0 if g == 0.0 else math.inf)
        gap = norm(u - root_v)
        gap_bound = slack * (model / traj.epsilon)
        ratio = gap * traj.epsilon / max(g0 * math.exp(-t), _TINY)
        max_dev = max(max_dev, dev)
        max_gap_ratio = max(max_gap_ratio, ratio)
        rows.append([float(t), float(g), model, gap, gap_bound])
    return rows, max_dev, max_gap_ratio


def _run_flow(cfg: dict, out_dir: Path):
    problem = corpus.problem_from_dict(cfg["problem"])
    eps = float(cfg["epsilon"])
    at_stopping = cfg["t_end"] is None
    t_end = flow.stopping_time(eps) if at_stopping else float(cfg["t_end"])
    u0 = None if cfg["u0"] is None else cfg["u0"]
    traj = flow.integrate_flow(
        problem,
        eps,
        t_end,
        checkpoints=int(cfg["checkpoints"]),
        u0=u0,
        rtol=float(cfg["rtol"]),
        atol=float(cfg["atol"]),
    )
    root = regroot.solve_regularized(problem, eps)
    slack = float(cfg["slack"])
    rows, max_dev, max_gap_ratio = _flow_tables(problem, traj, root.v, slack)
    g0 = float(traj.residuals[0])

    checks = [
        _check(CHECK_RESIDUAL_DECAY, max_dev, float(cfg["decay_tol"])),
        _check(CHECK_FLOW_LIMIT_GAP, max_gap_ratio, slack),
    ]
    if at_stopping:
        final_gap = norm(traj.states[-1] - root.v)
        ratio = final_gap / max(g0 * eps, _TINY)
        checks.append(_check(CHECK_STOPPING_GAP, ratio, slack))

    _write_trajectory(out_dir / "trajectory.csv", traj)
    run = {
        "label": "flow",
        "metrics": {
            "epsilon": eps,
            "t_end": t_end,
            "g0": g0,
            "final_residual": float(traj.residuals[-1]),
            "final_root_gap": norm(traj.states[-1] - root.v),
            "accepted_steps": traj.accepted,
            "rejected_steps": traj.rejected,
            "rhs_evals": traj.rhs_evals,
            "root_newton_iters": root.newton_iters,
        },
        "checks": checks,
        "artifacts": ["trajectory.csv"],
    }
    table = {
        "columns": ["t", "residual", "model_residual", "root_gap", "gap_bound"],
        "rows": rows,
    }
    return [run], table, problem


# ---------------------------------------------------------------------------
# iterate


def _schedule_from_cfg(d) -> iterate.Schedule:
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("schedule must be a mapping with a 'kind'")
    kind = d["kind"]
    keys = set(d) - {"kind"}
    if kind == "constant":
        if keys != {"epsilon"}:
            raise ValueError("constant schedule takes exactly 'epsilon'")
        return iterate.Schedule.constant(float(d["epsilon"]))
    if kind == "geometric":
        if not {"eps0", "ratio"} <= keys or keys - {"eps0", "ratio", "floor"}:
            raise ValueError("geometric schedule takes 'eps0', 'ratio', optional 'floor'")
        return iterate.Schedule.geometric(
            float(d["eps0"]), float(d["ratio"]), float(d.get("floor", 0.0))
        )
    if kind == "oracle":
        if keys - {"floor"}:
            raise ValueError("oracle schedule takes only an optional 'floor'")
        return iterate.Schedule.oracle(float(d.get("floor", 0.0)))
    raise ValueError(f"unknown schedule kind {kind!r}")


def _steprule_from_cfg(d) -> iterate.StepRule:
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("step_rule must be a mapping with a 'kind'")
    kind = d["kind"]
    keys = set(d) - {"kind"}
    if kind == "constant_p":
        if keys != {"p"}:
            raise ValueError("constant_p step rule takes exactly 'p'")
        return iterate.StepRule.constant_p(float(d["p"]))
    if kind == "constant_h":
        if keys != {"h"}:
            raise ValueError("constant_h step rule takes exactly 'h'")
        return iterate.StepRule.constant_h(float(d["h"]))
    if kind == "explicit":
        if keys != {"h"}:
            raise ValueError("explicit step rule takes exactly 'h' (a list)")
        return iterate.StepRule.explicit(d["h"])
    raise ValueError(f"unknown step rule kind {kind!r}")


def _run_iterate(cfg: dict, out_dir: Path):
    problem = corpus.problem_from_dict(cfg["problem"])
    schedule = _schedule_from_cfg(cfg["schedule"])
    rule = _steprule_from_cfg(cfg["step_rule"])
    history = iterate.run_iteration(
        problem,
        schedule,
        rule,
        int(cfg["max_n"]),
        u0=cfg["u0"],
        stop_residual=None if cfg["stop_residual"] is None else float(cfg["stop_residual"]),
        record_roots=bool(cfg["record_roots"]),
    )
    tracked = history.steps[0].gap is not None
    checks = []
    if tracked and len(history.steps) >= 2:
        report = iterate.verify_step_recursion(problem, history, slack=float(cfg["slack"]))
        excess = 0.0
        for rec in report.records:
            excess = max(excess, (rec.gap_next - rec.bound) / max(rec.bound, _TINY))
        checks.append(
            _check(CHECK_RECURSION_STEP, excess, float(cfg["slack"]), passed=report.passed)
        )
    rows = [
        [s.index, s.epsilon, s.h, s.residual, s.gap, s.root_gap] for s in history.steps
    ]
    run = {
        "label": "iterate",
        "metrics": {
            "steps_taken": len(history.steps) - 1,
            "converged": history.converged,
            "final_residual": float(history.steps[-1].residual),
            "final_gap": None if not tracked else float(history.steps[-1].gap),
        },
        "checks": checks,
        "artifacts": ["history.csv"],
    }
    table = {
        "columns": ["n", "eps_n", "h_n", "residual_n", "oracle_g_n", "oracle_b_n"],
        "rows": rows,
    }
    return [run], table, problem


# ---------------------------------------------------------------------------
# reg-path


def _run_reg_path(cfg: dict, out_dir: Path):
    problem = corpus.problem_from_dict(cfg["problem"])
    path = regroot.regularization_path(
        problem,
        [float(e) for e in cfg["epsilons"]],
        newton_tol=None if cfg["newton_tol"] is None else float(cfg["newton_tol"]),
    )
    try:
        y = regroot.minimal_norm_solution(problem)
    except ValueError:
        y = None

    rows = []
    for i, entry in enumerate(path.entries):
        gap = path.root_gaps[i] if i < len(path.root_gaps) else None
        rows.append([entry.epsilon, entry.v_norm, entry.error_to_y, gap])

    checks = []
    if y is not None:
        y_norm = norm(y)
        max_vnorm = max(e.v_norm for e in path.entries)
        checks.append(
            _check(CHECK_NORM_DOMINANCE, max_vnorm, y_norm * (1.0 + float(cfg["norm_slack"])))
        )
        worst = -math.inf
        for entry in path.entries:
            v = entry.root.v
            worst = max(worst, norm(v - y) ** 2 - inner(y, y - v))
        checks.append(_check(CHECK_ERROR_INNER_BOUND, worst, float(cfg["inner_slack"])))

    run = {
        "label": "reg-path",
        "metrics": {
            "entries": len(path.entries),
            "final_epsilon": path.entries[-1].epsilon,
            "final_v_norm": path.entries[-1].v_norm,
            "final_error": path.entries[-1].error_to_y,
            "min_norm_available": y is not None,
            "all_converged": all(e.root.converged for e in path.entries),
        },
        "checks": checks,
        "artifacts": ["path.csv"],
    }
    table = {
        "columns": ["eps", "v_norm", "err_to_min_norm", "root_gap"],
        "rows": rows,
    }
    return [run], table, problem


# ---------------------------------------------------------------------------
# noise-study


def _run_noise_study(cfg: dict, out_dir: Path):
    problem = corpus.problem_from_dict(cfg["problem"])
    deltas = [float(d) for d in cfg["deltas"]]
    if len(deltas) == 0:
        raise ValueError("deltas must be non-empty")
    if any(not (0.0 < d < 1.0) for d in deltas):
        raise ValueError("every delta must lie in (0, 1)")
    slack = float(cfg["slack"])
    seed = int(cfg["seed"])
    product_mode = cfg["epsilons"] is not None
    if product_mode == (cfg["b_exp"] is not None):
        raise ValueError("provide exactly one of 'epsilons' (grid) or 'b_exp' (stopping rule)")

    runs = []
    rows = []
    if product_mode:
        epsilons = [float(e) for e in cfg["epsilons"]]
        if any(e <= 0 for e in epsilons):
            raise ValueError("epsilons must be positive")
        columns = ["delta", "eps", "root_gap", "gap_bound"]
        max_ratio = 0.0
        cell = 0
        for i, delta in enumerate(deltas):
            f_noisy = corpus.add_noise(problem.data, delta, seed + i)
            for eps in epsilons:
                v = regroot.solve_regularized(problem, eps)
                w = regroot.solve_regularized(problem, eps, f_override=f_noisy, init=v.v)
                gap = norm(w.v - v.v)
                bound = slack * delta / eps
                rows.append([delta, eps, gap, bound])
                max_ratio = max(max_ratio, gap * eps / delta)
                cell += 1
        runs.append(
            {
                "label": "noise-grid",
                "metrics": {"cells": cell, "max_gap_ratio": max_ratio},
                "checks": [_check(CHECK_NOISE_GAP, max_ratio, slack)],
                "artifacts": ["noise.csv"],
            }
        )
    else:
        b_exp = float(cfg["b_exp"])
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("deltas must be strictly decreasing for the stopping study")
        y = regroot.minimal_norm_solution(problem)
        columns = [
            "delta",
            "eps",
            "root_gap",
            "gap_bound",
            "stop_gap",
            "stop_bound",
            "err_at_stop",
        ]
        max_root_ratio = 0.0
        max_stop_ratio = 0.0
        errors = []
        for i, delta in enumerate(deltas):
            f_noisy = corpus.add_noise(problem.data, delta, seed + i)
            result = flow.solve_noisy_to_stopping(
                problem,
                f_noisy,
                delta,
                b_exp,
                checkpoints=int(cfg["checkpoints"]),
                rtol=float(cfg["rtol"]),
                atol=float(cfg["atol"]),
            )
            eps = result.epsilon_used
            v = regroot.solve_regularized(problem, eps)
            w = regroot.solve_regularized(problem, eps, f_override=f_noisy, init=v.v)
            root_gap = norm(w.v - v.v)
            root_bound = slack * delta / eps
            g0d = float(result.trajectory.residuals[0])
            stop_gap = norm(result.w_final - w.v)
            stop_bound = slack * g0d * eps
            err = norm(result.w_final - y)
            errors.append(err)
            rows.append([delta, eps, root_gap, root_bound, stop_gap, stop_bound, err])
            max_root_ratio = max(max_root_ratio, root_gap * eps / delta)
            max_stop_ratio = max(max_stop_ratio, stop_gap / max(g0d * eps, _TINY))
            traj_name = f"trajectory-{i:02d}.csv"
            _write_trajectory(out_dir / traj_name, result.trajectory)
            runs.append(
                {
                    "label": f"delta-{i:02d}",
                    "metrics": {
                        "delta": delta,
                        "epsilon": eps,
                        "g0_noisy": g0d,
                        "err_at_stop": err,
                    },
                    "checks": [],
                    "artifacts": [traj_name, "noise.csv"],
                }
            )
        worst_increase = 0.0
        for prev, nxt in zip(errors, errors[1:]):
            worst_increase = max(worst_increase, nxt / max(prev, _TINY))
        sweep_checks = [
            _check(CHECK_NOISE_GAP, max_root_ratio, slack),
            _check(CHECK_NOISY_STOPPING_GAP, max_stop_ratio, slack),
        ]
        if len(errors) >= 2:
            sweep_checks.append(
                _check(
                    CHECK_NOISE_CONVERGENCE,
                    worst_increase,
                    1.0,
                    passed=worst_increase < 1.0,
                )
            )
        runs.append(
            {
                "label": "noise-sweep",
                "metrics": {
                    "b_exp": b_exp,
                    "errors_at_stop": errors,
                },
                "checks": sweep_checks,
                "artifacts": ["noise.csv"],
            }
        )
    table = {"columns": columns, "rows": rows}
    return runs, table, problem


# ---------------------------------------------------------------------------
# lemma-sim


def _sequence_from_cfg(spec, horizon: int, name: str) -> np.ndarray:
    if isinstance(spec, bool):
        raise ValueError(f"{name} must be a number, list, or generator mapping")
    if isinstance(spec, (int, float)):
        return np.full(horizon, float(spec))
    if isinstance(spec, list):
        arr = np.asarray(spec, dtype=float)
        if arr.size < horizon:
            raise ValueError(f"{name} supplies {arr.size} terms but horizon is {horizon}")
        return arr[:horizon]
    if isinstance(spec, dict):
        kind = spec.get("kind")
        k = np.arange(1, horizon + 1, dtype=float)
        if kind == "power":
            keys = set(spec) - {"kind", "scale", "exponent"}
            if keys:
                raise ValueError(f"unknown power-sequence keys {sorted(keys)}")
            return float(spec.get("scale", 1.0)) * k ** (-float(spec["exponent"]))
        if kind == "geometric":
            keys = set(spec) - {"kind", "scale", "ratio"}
            if keys:
                raise ValueError(f"unknown geometric-sequence keys {sorted(keys)}")
            return float(spec.get("scale", 1.0)) * float(spec["ratio"]) ** k
        raise ValueError(f"unknown sequence kind {kind!r} for {name}")
    raise ValueError(f"{name} must be a number, list, or generator mapping")


def _run_lemma_sim(cfg: dict, out_dir: Path):
    horizon = int(cfg["horizon"])
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    a = _sequence_from_cfg(cfg["a"], horizon, "a")
    b = _sequence_from_cfg(cfg["b"], horizon, "b")
    g1 = float(cfg["g1"])
    slack = float(cfg["slack"])
    chain = recursion.check_bound_chain(g1, a, b, slack=slack)
    diag = recursion.horizon_diagnostics(a, b, horizon)

    excess = 0.0
    for sim, unr, maj in zip(chain.simulated, chain.unrolled, chain.majorant):
        excess = max(excess, (sim - unr) / max(unr, _TINY), (unr - maj) / max(maj, _TINY))
    checks = [_check(CHECK_INDUCTION_CHAIN, excess, slack, passed=chain.passed)]

    rows = []
    for m in range(horizon + 1):
        tail = float(diag.tail_sums[m]) if m < horizon else None
        rows.append(
            [m, float(chain.simulated[m]), float(chain.unrolled[m]), float(chain.majorant[m]), tail]
        )
    run = {
        "label": "lemma-sim",
        "metrics": {
            "horizon": horizon,
            "final_value": float(chain.simulated[-1]),
            "weight_sum": diag.weight_sum,
            "weights_diverging_trend": diag.weights_diverging_trend,
            "tail_sum": diag.tail_sum,
            "tail_nonincreasing_trend": diag.tail_nonincreasing_trend,
        },
        "checks": checks,
        "artifacts": ["sequences.csv"],
    }
    table = {
        "columns": ["n", "simulated", "unrolled_bound", "majorant", "tail_sum"],
        "rows": rows,
    }
    return [run], table, None


# ---------------------------------------------------------------------------
# assembly


_DEFAULTS = {
    "flow": (
        dict(
            epsilon=1e-2,
            t_end=None,
            checkpoints=10,
            rtol=1e-8,
            atol=1e-10,
            decay_tol=1e-3,
            slack=1.05,
            u0=None,
        ),
        ("problem",),
        _run_flow,
    ),
    "iterate": (
        dict(
            max_n=60,
            stop_residual=None,
            record_roots=False,
            slack=1e-8,
            u0=None,
        ),
        ("problem", "schedule", "step_rule"),
        _run_iterate,
    ),
    "reg-path": (
        dict(newton_tol=None, norm_slack=1e-8, inner_slack=1e-9),
        ("problem", "epsilons"),
        _run_reg_path,
    ),
    "noise-study": (
        dict(
            epsilons=None,
            b_exp=None,
            slack=1.05,
            checkpoints=10,
            rtol=1e-8,
            atol=1e-10,
        ),
        ("problem", "deltas"),
        _run_noise_study,
    ),
    "lemma-sim": (
        dict(g1=1.0, slack=1e-12),
        ("a", "b", "horizon"),
        _run_lemma_sim,
    ),
}


def run_experiment(config: dict, out_dir) -> dict:
    """Validate the config, run the study, write artifacts, return the report.

    The report is also written to ``<out_dir>/report.json`` and is byte
    reproducible for a fixed config; wall-clock timings are written to
    ``<out_dir>/timing.json`` so they never perturb the report.
    """
    if not isinstance(config, dict):
        raise ValueError("config must be a mapping")
    kind = config.get("kind")
    if kind not in KINDS:
        raise ValueError(f"experiment kind must be one of {KINDS}, got {kind!r}")
    defaults, required, runner = _DEFAULTS[kind]
    cfg = _merge_defaults(config, defaults, required, kind)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    runs, table, problem = runner(cfg, out_dir)
    elapsed = time.perf_counter() - start

    artifacts = sorted({name for run in runs for name in run["artifacts"]} | {"report.json"})
    report = {
        "kind": kind,
        "config": cfg,
        "runs": runs,
        "table": table,
        "checks_pass": all(c["pass"] for run in runs for c in run["checks"]),
        "artifacts": artifacts,
    }
    if problem is not None:
        report["problem"] = corpus.describe_problem(cfg["problem"])
    report = _jsonable(report)

    table_csv = emit_table(report, "csv")
    csv_name = {
        "flow": None,  # the trajectory file is the flow's CSV artifact
        "iterate": "history.csv",
        "reg-path": "path.csv",
        "noise-study": "noise.csv",
        "lemma-sim": "sequences.csv",
    }[kind]
    if csv_name is not None:
        (out_dir / csv_name).write_text(table_csv)

    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    (out_dir / "timing.json").write_text(
        json.dumps({"total_seconds": elapsed}, indent=2, sort_keys=True) + "\n"
    )
    return report


def _fmt(value, spec: str) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return spec % float(value)


def emit_table(report: dict, fmt: str = "markdown") -> str:
    """Render the report's summary table.

    CSV carries full double precision (17 significant digits) for
    machine consumption; markdown rounds to 6 significant digits for
    reading.  Identical reports render to identical bytes.
    """
    if fmt not in ("markdown", "csv"):
        raise ValueError(f"format must be 'markdown' or 'csv', got {fmt!r}")
    table = report["table"]
    cols = table["columns"]
    if fmt == "csv":
        lines = [",".join(cols)]
        for row in table["rows"]:
            lines.append(",".join(_fmt(v, "%.17g") for v in row))
        return "\n".join(lines) + "\n"
    widths = None
    body = [[_fmt(v, "%.6g") for v in row] for row in table["rows"]]
    widths = [
        max(len(c), *(len(r[i]) for r in body)) if body else len(c)
        for i, c in enumerate(cols)
    ]
    header = "| " + " | ".join(c.ljust(w) for c, w in zip(cols, widths)) + " |"
    rule = "|-" + "-|-".join("-" * w for w in widths) + "-|"
    lines = [header, rule]
    for r in body:
        lines.append("| " + " | ".join(v.ljust(w) for v, w in zip(r, widths)) + " |")
    return "\n".join(lines) + "\n"


def _write_trajectory(path: Path, traj: flow.FlowResult) -> None:
    dim = traj.states.shape[1]
    header = "t,g," + ",".join(f"u_{i}" for i in range(dim))
    lines = [header]
    for t, g, u in zip(traj.times, traj.residuals, traj.states):
        entries = [("%.17g" % t), ("%.17g" % g)] + [("%.17g" % x) for x in u]
        lines.append(",".join(entries))
    path.write_text("\n".join(lines) + "\n")


def _apply_override(config: dict, item: str) -> None:
    if "=" not in item:
        raise ValueError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    target = config
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = target.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ValueError(f"cannot descend into non-mapping config key {part!r}")
        target = nxt
    target[parts[-1]] = value


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dsm",
        description="Run regularized Newton flow and iteration experiments.",
    )
    parser.add_argument("kind", choices=KINDS, help="experiment kind")
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        dest="overrides",
        help="override a config field (dotted keys, JSON values)",
    )
    parser.add_argument(
        "--table",
        choices=("markdown", "csv", "none"),
        default="markdown",
        help="summary table format printed to stdout",
    )
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
        if "kind" in config and config["kind"] != args.kind:
            raise ValueError(
                f"config file is for kind {config['kind']!r} but {args.kind!r} was requested"
            )
        config["kind"] = args.kind
        for item in args.overrides:
            _apply_override(config, item)
        if args.seed is not None:
            config["seed"] = args.seed
        started = time.perf_counter()
        report = run_experiment(config, args.out)
        elapsed = time.perf_counter() - started
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"dsm: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"dsm: numerical failure: {exc}", file=sys.stderr)
        return 3

    if args.table != "none":
        print(emit_table(report, args.table), end="")
    n_checks = sum(len(run["checks"]) for run in report["runs"])
    verdict = "pass" if report["checks_pass"] else "FAIL"
    print(f"{args.kind}: {n_checks} bound check(s) {verdict} in {elapsed:.3f}s")
    for run in report["runs"]:
        for c in run["checks"]:
            state = "pass" if c["pass"] else "FAIL"
            print(
                f"  [{state}] {c['check']}: observed {c['observed']:.6g}"
                f" vs bound {c['bound']:.6g} (margin {c['margin']:.6g})"
            )
    return 0 if report["checks_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
