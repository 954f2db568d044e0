"""obs-scout command line: rank | gramian | select | ekf | lemmas."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import ekf as ekf_mod
from . import gramian as gram
from . import rank as rank_mod
from . import selection as sel
from . import svg
from .dynamics import STATE_NAMES
from .scenario import Scenario, ScenarioError, load_scenario

log = logging.getLogger("obs_scout")

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG = 0, 1, 2


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- subcommands ------------------------------------------------------------

def lemma_rows(results):
    for r in results:
        expected = r.scenario.expected or "recorded"
        yield [r.scenario.name, expected, r.actual, max(0.0, r.min_singular) + 0.0,
               min(r.ranks), max(r.ranks)]


LEMMA_HEADER = ["scenario", "expected", "actual", "min_singular_value", "min_rank", "max_rank"]


def cmd_lemmas(sc: Scenario | None, out: Path, args) -> int:
    seed = rank_mod.DEFAULT_STATE_SEED if args.seed is None else args.seed
    results = rank_mod.check_lemma_suite(seed=seed)
    write_csv(out / "lemma_suite.csv", LEMMA_HEADER, lemma_rows(results))
    ok = True
    for r in results:
        status = "record" if r.passed is None else ("PASS" if r.passed else "FAIL")
        print(f"{status:6s} {r.scenario.name:28s} expected={r.scenario.expected or '-':13s} actual={r.actual}")
        ok &= r.passed is not False
    return EXIT_OK if ok else EXIT_COMPUTE


def cmd_rank(sc: Scenario, out: Path, args) -> int:
    plan = sc.plan()
    mode = sc.data["rank"]["mode"]
    depth = sc.data["rank"]["depth"]
    report = rank_mod.observability_rank(sc.model, sc.sensors(), mode, plan.initial,
                                         depth=depth, speed=plan.speed)
    doc = report.to_dict()
    doc.update({"model": sc.model, "mode": mode, "state": plan.initial.tolist(),
                "sensors": [s["id"] for s in sc.data["sensors"]]})
    write_json(out / "rank_report.json", doc)
    seed = rank_mod.DEFAULT_STATE_SEED if args.seed is None else args.seed
    write_csv(out / "lemma_suite.csv", LEMMA_HEADER, lemma_rows(rank_mod.check_lemma_suite(seed=seed)))
    print(f"rank {report.rank}/5: {report.verdict}")
    return EXIT_OK


def cmd_gramian(sc: Scenario, out: Path, args) -> int:
    W = gram.empirical_gramian(sc.plan(), sc.sensors(), sc.epsilon)
    eig = gram.eigen_analysis(W)
    doc = {"matrix": W.matrix.tolist(), "epsilon": W.epsilon, "horizon": list(W.horizon),
           "state_names": list(STATE_NAMES)}
    doc.update(eig.to_dict())
    write_json(out / "gramian.json", doc)
    rows = [["W", i, *W.matrix[i], ""] for i in range(5)]
    rows += [["eigvec", j, *eig.eigenvectors[:, j], eig.eigenvalues[j]] for j in range(5)]
    write_csv(out / "gramian.csv", ["kind", "index", *STATE_NAMES, "eigenvalue"], rows)
    (out / "eigvec.svg").write_text(
        svg.eigenvector_bars(eig.eigenvectors, eig.eigenvalues, STATE_NAMES), encoding="utf-8")
    print(f"lambda_min = {eig.lambda_min:.6g}, rank {eig.rank}")
    return EXIT_OK


def run_selection(sc: Scenario, solver: str):
    sensors = sc.sensors()
    W = sel.segment_gramians(sc.plan(), sensors, sc.K, sc.epsilon)
    plan = None
    if solver == "exhaustive":
        plan = sel.optimize_exhaustive(W)
    elif solver == "greedy":
        plan = sel.optimize_greedy(W)
    relaxed = sel.optimize_relaxed(W, iters=sc.data["relaxed_iters"])
    return W, (relaxed if plan is None else plan), relaxed


def cmd_select(sc: Scenario, out: Path, args) -> int:
    solver = args.solver or sc.solver
    W, plan, relaxed = run_selection(sc, solver)
    ids = W.sensor_ids
    naive_idx = sc.naive_sensor_index()
    naive = sel.naive_plan(W.p, W.K, naive_idx)
    doc = {
        "solver": solver,
        "segments": [None if c is None else ids[c] for c in plan.choices],
        "objective": plan.objective,
        "window_edges": [float(t) for t in W.window_edges],
        "relaxed_objective": relaxed.relaxed_objective,
        "relaxed_activation": relaxed.relaxed.tolist(),
        "naive_segments": [ids[naive_idx]] * W.K,
        "naive_objective": sel.lambda_min(sel.assemble(W, naive)),
        "sensor_ids": ids,
    }
    write_json(out / "selection.json", doc)
    write_csv(out / "relaxed_trace.csv", ["iteration", "best_objective"],
              ([i, v] for i, v in enumerate(relaxed.trace)))
    print(f"{solver}: {doc['segments']} lambda_min = {plan.objective:.6g}")
    return EXIT_OK


def cmd_ekf(sc: Scenario, out: Path, args) -> int:
    cfg = sc.data["ekf"]
    solver = args.solver or sc.solver
    W, plan, _ = run_selection(sc, solver)
    sensors = sc.sensors()
    traj_plan = sc.plan()
    Q, P0, dtm = sc.ekf_q(), sc.ekf_init_cov(), float(cfg["dt_meas"])
    seed = cfg["seed"] if args.seed is None else args.seed
    naive = [sc.naive_sensor_index()] * W.K

    trial = ekf_mod.run_trial(traj_plan, plan, sensors, seed, Q, P0, dtm)
    naive_trial = ekf_mod.run_trial(traj_plan, naive, sensors, seed, Q, P0, dtm)
    err = trial.error
    header = (["t"] + [f"truth_{n}" for n in STATE_NAMES] + [f"est_{n}" for n in STATE_NAMES]
              + [f"err_{n}" for n in STATE_NAMES] + [f"cov_{n}" for n in STATE_NAMES] + ["active_sensor"])
    rows = ([trial.times[j], *trial.truth[j], *trial.estimate[j], *err[j], *trial.cov_diag[j], trial.active[j]]
            for j in range(len(trial.times)))
    write_csv(out / "ekf_trial.csv", header, rows)

    seeds = [seed + i for i in range(cfg["n_trials"])]
    summary = ekf_mod.monte_carlo(traj_plan, plan, naive, sensors, seeds, Q, P0, dtm)
    doc = summary.to_dict()
    doc.update({
        "solver": solver,
        "optimal_segments": [None if c is None else W.sensor_ids[c] for c in plan.choices],
        "naive_segments": [W.sensor_ids[c] for c in naive],
        "seed": seed,
        "trial_rmse": trial.rmse.tolist(),
        "state_names": list(STATE_NAMES),
    })
    write_json(out / "ekf_summary.json", doc)

    edges = W.window_edges
    markers = [(edges[k], edges[k + 1],
                f"{W.sensor_ids[c] if c is not None else '-'} / {W.sensor_ids[naive[k]]}")
               for k, c in enumerate(plan.choices)]
    series = {
        "optimal": (err, np.sqrt(trial.cov_diag)),
        "naive": (naive_trial.error, np.sqrt(naive_trial.cov_diag)),
    }
    (out / "ekf_traces.svg").write_text(svg.trace_panels(trial.times, series, STATE_NAMES, markers),
                                        encoding="utf-8")
    print(f"mean total RMSE optimal {np.mean(summary.total_optimal):.4g} "
          f"vs naive {np.mean(summary.total_naive):.4g}; win fraction {summary.win_fraction:.2f}")
    return EXIT_OK


COMMANDS = {"rank": cmd_rank, "gramian": cmd_gramian, "select": cmd_select,
            "ekf": cmd_ekf, "lemmas": cmd_lemmas}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="obs-scout", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--scenario", help="scenario JSON (optional for lemmas)")
    ap.add_argument("--out", help="output directory (default: scenario 'output' or ./out)")
    ap.add_argument("--solver", choices=["exhaustive", "greedy", "relaxed"])
    ap.add_argument("--seed", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    sc = None
    try:
        if args.scenario:
            sc = load_scenario(args.scenario)
        elif args.command != "lemmas":
            raise ScenarioError("--scenario is required for this command")
    except ScenarioError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or (sc.output if sc else "out"))
    out.mkdir(parents=True, exist_ok=True)
    if sc is not None:
        (out / "scenario.normalized.json").write_text(sc.dumps(), encoding="utf-8")
    try:
        return COMMANDS[args.command](sc, out, args)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as err:
        log.debug("computation failed", exc_info=True)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
