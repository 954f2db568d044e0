"""Eigen-analysis of the line + circle Gramian for equal line and arc durations.

Writes the eigenvalues and unit eigenvectors as JSON and a bar-chart SVG, and
prints which state dominates each eigenvector.

    python3 scripts/dubins_eigenvectors.py --out out/dubins_eigen --duration 5
"""

import argparse
import json
from pathlib import Path

import numpy as np

from obs_scout.dynamics import STATE_NAMES
from obs_scout.gramian import analytic_circle_gramian, analytic_line_gramian, dubins_gramian, eigen_analysis
from obs_scout.svg import eigenvector_bars


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=5.0, help="line and arc duration (s)")
    ap.add_argument("--speed", type=float, default=1.0)
    ap.add_argument("--turn-rate", type=float, default=1.0, help="rad/s")
    ap.add_argument("--heading", type=float, default=0.0, help="initial heading (rad)")
    ap.add_argument("--epsilon", type=float, default=0.01)
    ap.add_argument("--out", default="out/dubins_eigen")
    args = ap.parse_args()

    t, v = args.duration, args.speed
    line = analytic_line_gramian(t, v, args.heading, args.epsilon)
    circle = analytic_circle_gramian(t, v, args.heading, args.turn_rate, args.epsilon)
    rep = eigen_analysis(dubins_gramian(line, circle))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"duration": t, "speed": v, "turn_rate": args.turn_rate, "epsilon": args.epsilon,
           "matrix": dubins_gramian(line, circle).matrix.tolist(), **rep.to_dict()}
    (out / "dubins_eigen.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    (out / "eigvec.svg").write_text(eigenvector_bars(rep.eigenvectors, rep.eigenvalues, STATE_NAMES))

    print(f"line rank {eigen_analysis(line).rank}, combined rank {rep.rank}")
    for j, lam in enumerate(rep.eigenvalues):
        vec = rep.eigenvectors[:, j]
        top = STATE_NAMES[int(np.argmax(np.abs(vec)))]
        print(f"lambda_{j + 1} = {lam:10.4g}  dominant {top:5s}  |v| = {np.round(np.abs(vec), 3)}")


if __name__ == "__main__":
    main()
