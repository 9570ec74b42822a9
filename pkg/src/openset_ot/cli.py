"""Command-line entry point.

Solver subcommands read ``--source``/``--target`` CSVs, or draw a synthetic
Gaussian task per trial when no files are given. Reports are JSON; with the
same arguments and seed two runs differ only in the ``timestamps`` entry.
Errors exit nonzero and print ``{"error": <category>, "message": ...}`` on
stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import sys

import numpy as np

from . import datagen, io, label_shift, metrics, model_selection, pipeline, rejection
from .errors import IOFailureError, InvalidParameterError, OpenSetOTError, ParseError
from .ot_core import DEFAULT_MAX_ITER, DEFAULT_TOL

EXIT_ERROR = 1
EXIT_USAGE = 2


class UsageError(OpenSetOTError):
    category = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_task_args(p):
    g = p.add_argument_group("synthetic task (used when --source/--target are absent)")
    g.add_argument("--shared", type=_ints, default=[1, 2], help="labels present in the source")
    g.add_argument("--n-classes", type=int, default=3)
    g.add_argument("--n-per-class", type=int, default=1000)
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--radius", type=float, default=datagen.DEFAULT_RADIUS)
    g.add_argument("--source-proportions", type=_floats, default=None)
    g.add_argument("--target-proportions", type=_floats, default=None)
    g.add_argument("--seed", type=int, default=0)


def _add_solver_args(p, eta, alpha=True):
    p.add_argument("--source", help="source CSV (labelled)")
    p.add_argument("--target", help="target CSV; a label column is used for scoring only")
    p.add_argument("--eta", type=float, default=eta)
    if alpha:
        p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--normalize-cost", action="store_true", help="divide the cost matrix by its maximum")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--report", help="JSON report path (default: stdout)")
    p.add_argument("--plan", help="sparse plan CSV of the first trial")
    p.add_argument("--plot-data", help="per-target CSV of the first trial")
    _add_task_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="openset-ot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_solver_args(sub.add_parser("reject", help="flag unknown-class targets"), eta=0.1)
    _add_solver_args(sub.add_parser("labelshift", help="estimate class proportions and labels"),
                     eta=0.001, alpha=False)
    p = sub.add_parser("pipeline", help="rejection followed by label-shift")
    _add_solver_args(p, eta=0.001)
    p.add_argument("--marginal-mode", choices=pipeline.MARGINAL_MODES, default="learned")

    p = sub.add_parser("reverse-validate", help="select (eta, alpha) over a grid")
    _add_solver_args(p, eta=0.1)
    p.add_argument("--grid-eta", type=_floats, default=list(model_selection.DEFAULT_ETAS))
    p.add_argument("--grid-alpha", type=_floats, default=list(model_selection.DEFAULT_ALPHAS))
    p.add_argument("--maximize", action="store_true", help="pick the largest score instead of the smallest")

    p = sub.add_parser("generate", help="write a synthetic source/target pair")
    p.add_argument("--out-source", required=True)
    p.add_argument("--out-target", required=True)
    _add_task_args(p)

    p = sub.add_parser("eval", help="score a plot-data CSV against its true labels")
    p.add_argument("--predictions", required=True, help="CSV written by --plot-data")
    p.add_argument("--shared", type=_ints, required=True)
    p.add_argument("--report", help="JSON report path (default: stdout)")
    return parser


def _task(args, seed):
    return datagen.open_set_task(
        args.shared, n_classes=args.n_classes, n_per_class=args.n_per_class, noise=args.noise,
        seed=seed, source_proportions=args.source_proportions,
        target_proportions=args.target_proportions, radius=args.radius,
    )


def _trial_seed(seed, trial):
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def _datasets(args):
    """Yield ``(trial_seed, source, target, shared)`` for every trial."""
    if (args.source is None) != (args.target is None):
        raise InvalidParameterError("--source and --target must be given together")
    if args.trials < 1:
        raise InvalidParameterError(f"--trials must be >= 1, got {args.trials}")
    if args.source is not None:
        if args.trials != 1:
            raise InvalidParameterError("--trials > 1 needs a synthetic task, not fixed files")
        source, target = io.read_dataset(args.source), io.read_dataset(args.target)
        shared = [] if source.labels is None else sorted(set(source.labels.tolist()))
        yield None, source, target, shared
        return
    for t in range(args.trials):
        seed = _trial_seed(args.seed, t)
        task = _task(args, seed)
        yield seed, task.source, task.target, list(task.shared)


def _plan_diag(plan):
    return {"iterations": plan.iterations, "marginal_error": plan.marginal_error, "converged": plan.converged}


def _run_reject(args, source, target, shared):
    cfg = rejection.RejectionConfig(eta=args.eta, alpha=args.alpha, tol=args.tol, max_iter=args.max_iter,
                                    normalize_cost=args.normalize_cost)
    res = rejection.reject(source, target, cfg)
    out = {
        "results": {"n_rejected": int(res.rejected.sum()), "threshold": res.threshold},
        "diagnostics": {**_plan_diag(res.plan), "kkt": rejection.kkt_report(res).as_dict()},
    }
    if target.labels is not None:
        truth = ~np.isin(target.labels, shared)
        out["metrics"] = {
            "rejection_f1_macro": metrics.rejection_f1(res.rejected, truth),
            "f1_rejected": metrics.f1_binary(res.rejected, truth, "rejected"),
            "f1_common": metrics.f1_binary(res.rejected, truth, "common"),
        }
    pred = np.where(res.rejected, metrics.REJECT, -1)
    return out, res.plan.coupling, (pred, res.mu_t_star, res.rejected)


def _run_labelshift(args, source, target, shared):
    cfg = label_shift.LabelShiftConfig(eta=args.eta, tol=args.tol, max_iter=args.max_iter,
                                       normalize_cost=args.normalize_cost)
    res = label_shift.fit(source, target, cfg=cfg)
    out = {
        "results": {"nu": res.nu, "classes": res.classes},
        "diagnostics": _plan_diag(res.plan),
    }
    if target.labels is not None:
        scores = metrics.open_set_scores(res.predicted_labels, target.labels, shared)
        true_nu = np.array([np.mean(target.labels == c) for c in res.classes])
        out["metrics"] = {"f1_macro": scores["f1_macro"], "f1_per_class": scores["f1_per_class"],
                          "nu_l1_error": float(np.abs(res.nu - true_nu).sum())}
    mu_t = res.plan.coupling.sum(axis=0)
    return out, res.plan.coupling, (res.predicted_labels, mu_t, np.zeros(target.n, bool))


def _run_pipeline(args, source, target, shared):
    cfg = pipeline.PipelineConfig(eta=args.eta, alpha=args.alpha, tol=args.tol, max_iter=args.max_iter,
                                  normalize_cost=args.normalize_cost)
    res = pipeline.open_set_adapt(source, target, cfg, args.marginal_mode)
    out = {
        "results": {"n_rejected": int(res.rejection.rejected.sum()), "nu": res.nu,
                    "classes": res.labelshift.classes},
        "diagnostics": {
            "rejection": {**_plan_diag(res.rejection.plan), "kkt": rejection.kkt_report(res.rejection).as_dict()},
            "labelshift": _plan_diag(res.labelshift.plan),
        },
    }
    if target.labels is not None:
        out["metrics"] = metrics.open_set_scores(res.final_labels, target.labels, shared)
    return out, res.labelshift.plan.coupling, (res.final_labels, res.rejection.mu_t_star, res.rejection.rejected)


def _run_reverse_validate(args, source, target, shared):
    grid = model_selection.Grid(args.grid_eta, args.grid_alpha)
    base = rejection.RejectionConfig(eta=args.eta, alpha=args.alpha, tol=args.tol, max_iter=args.max_iter,
                                     normalize_cost=args.normalize_cost)
    rep = model_selection.reverse_validate(source, target, grid, base, maximize=args.maximize)
    out = {"results": rep.as_dict(), "diagnostics": {}}
    if rep.chosen is None:
        return out, None, None
    chosen_args = argparse.Namespace(**vars(args))
    chosen_args.eta, chosen_args.alpha = rep.chosen
    chosen_out, coupling, plot = _run_reject(chosen_args, source, target, shared)
    out["diagnostics"] = chosen_out["diagnostics"]
    if "metrics" in chosen_out:
        out["metrics"] = chosen_out["metrics"]
    return out, coupling, plot


RUNNERS = {
    "reject": _run_reject,
    "labelshift": _run_labelshift,
    "pipeline": _run_pipeline,
    "reverse-validate": _run_reverse_validate,
}


def _scalars(d, prefix=""):
    for key in sorted(d):
        value = d[key]
        if isinstance(value, dict):
            yield from _scalars(value, f"{prefix}{key}.")
        elif isinstance(value, (int, float, np.floating, np.integer)) and not isinstance(value, bool):
            yield prefix + key, float(value)


def summarize(trials) -> dict:
    """Mean and population std of every scalar metric across trials."""
    table = {}
    for trial in trials:
        for name, value in _scalars(trial.get("metrics", {})):
            table.setdefault(name, []).append(value)
    return {name: {"mean": float(np.mean(v)), "std": float(np.std(v))} for name, v in sorted(table.items())}


def _config(args) -> dict:
    skip = {"report", "plan", "plot_data", "source", "target", "out_source", "out_target", "predictions"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg["source"] = getattr(args, "source", None) is not None
    return cfg


def run_solver(args) -> dict:
    runner = RUNNERS[args.command]
    config = _config(args)
    trials = []
    for t, (seed, source, target, shared) in enumerate(_datasets(args)):
        out, coupling, plot = runner(args, source, target, shared)
        trials.append({"trial": t, "seed": seed, **out})
        if t == 0 and coupling is not None:
            if args.plan:
                io.write_plan(coupling, args.plan)
            if args.plot_data:
                io.write_plot_data(target, args.plot_data, *plot)
    report = {"command": args.command, "config": config, "trials": trials, "summary": summarize(trials)}
    if args.command == "reverse-validate":
        report["chosen"] = trials[0]["results"]["chosen"] if len(trials) == 1 else [t["results"]["chosen"] for t in trials]
    return report


def run_generate(args) -> dict:
    task = _task(args, args.seed)
    io.write_dataset(task.source, args.out_source)
    io.write_dataset(task.target, args.out_target)
    return {"command": "generate", "config": _config(args),
            "results": {"n_source": task.source.n, "n_target": task.target.n, "shared": list(task.shared)}}


def run_eval(args) -> dict:
    try:
        with open(args.predictions, newline="") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise IOFailureError(f"{args.predictions}: {exc.strerror or exc}") from exc
    if not rows or any(r.get("true_label", "") == "" for r in rows):
        raise ParseError("predictions need a true_label for every row")
    true = np.array([int(r["true_label"]) for r in rows])
    pred = np.array([int(r["predicted_label"]) for r in rows])
    return {"command": "eval", "config": _config(args), "metrics": metrics.open_set_scores(pred, true, args.shared)}


def _now():
    return dt.datetime.now(dt.timezone.utc).isoformat()


def main(argv=None) -> int:
    started = _now()
    try:
        args = build_parser().parse_args(argv)
        if args.command == "generate":
            report = run_generate(args)
        elif args.command == "eval":
            report = run_eval(args)
        else:
            report = run_solver(args)
        report["timestamps"] = {"started": started, "finished": _now()}
        text = io.report_json(report)
        if getattr(args, "report", None):
            io.write_report(report, args.report)
        else:
            sys.stdout.write(text)
    except UsageError as exc:
        sys.stderr.write(json.dumps({"error": exc.category, "message": str(exc)}) + "\n")
        return EXIT_USAGE
    except (OpenSetOTError, ValueError) as exc:
        category = getattr(exc, "category", "invalid-input")
        sys.stderr.write(json.dumps({"error": category, "message": str(exc)}) + "\n")
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
