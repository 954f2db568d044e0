"""Optimized vs GPS-everywhere sensor schedule, paired EKF Monte-Carlo.

    python3 scripts/schedule_vs_gps.py scenarios/fig2_analog.json --trials 100
"""

import argparse
import time

import numpy as np

from obs_scout.dynamics import STATE_NAMES
from obs_scout.ekf import monte_carlo
from obs_scout.scenario import load_scenario
from obs_scout.selection import assemble, lambda_min, naive_plan, optimize_exhaustive, optimize_greedy, optimize_relaxed, segment_gramians


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    cfg = sc.data["ekf"]
    plan, sensors = sc.plan(), sc.sensors()
    W = segment_gramians(plan, sensors, sc.K, sc.epsilon)
    ids = W.sensor_ids
    naive_idx = sc.naive_sensor_index()

    plans = {"exhaustive": optimize_exhaustive(W), "greedy": optimize_greedy(W), "relaxed": optimize_relaxed(W)}
    for name, p in plans.items():
        print(f"{name:10s} {[ids[c] if c is not None else '-' for c in p.choices]}  lambda_min {p.objective:.4g}")
    print(f"{'bound':10s} continuous relaxation {plans['relaxed'].relaxed_objective:.4g}")
    print(f"{'naive':10s} {[ids[naive_idx]] * sc.K}  lambda_min "
          f"{lambda_min(assemble(W, naive_plan(W.p, W.K, naive_idx))):.4g}")

    seed = cfg["seed"] if args.seed is None else args.seed
    n = args.trials or cfg["n_trials"]
    t0 = time.perf_counter()
    summ = monte_carlo(plan, plans[sc.solver], [naive_idx] * sc.K, sensors, range(seed, seed + n),
                       sc.ekf_q(), sc.ekf_init_cov(), cfg["dt_meas"])
    print(f"\n{n} paired trials in {time.perf_counter() - t0:.1f} s")
    print(f"{'state':6s} {'optimal':>10s} {'naive':>10s}   (mean RMSE)")
    for i, name in enumerate(STATE_NAMES):
        print(f"{name:6s} {summ.rmse_optimal[:, i].mean():10.4g} {summ.rmse_naive[:, i].mean():10.4g}")
    print(f"total  {np.mean(summ.total_optimal):10.4g} {np.mean(summ.total_naive):10.4g}")
    print(f"win fraction (optimal <= naive): {summ.win_fraction:.2f}")


if __name__ == "__main__":
    main()
