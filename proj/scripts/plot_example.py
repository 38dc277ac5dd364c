#!/usr/bin/env python3
"""Render the output of `sdae example` as a 3D sphere plot.

Usage: plot_example.py <example-out-dir> [output.png]
"""
import csv
import glob
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read_xyz(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return (
        np.array([float(r["x1"]) for r in rows]),
        np.array([float(r["x2"]) for r in rows]),
        np.array([float(r["x3"]) for r in rows]),
    )


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    out_dir = sys.argv[1]
    target = sys.argv[2] if len(sys.argv) > 2 else "example.png"

    fig = plt.figure(figsize=(8, 8))
    ax = fig.add_subplot(projection="3d")

    u, v = np.mgrid[0 : 2 * np.pi : 60j, 0 : np.pi : 30j]
    ax.plot_surface(
        np.cos(u) * np.sin(v), np.sin(u) * np.sin(v), np.cos(v),
        color="lightgray", alpha=0.25, linewidth=0,
    )

    curve = os.path.join(out_dir, "constraint_curve.csv")
    if os.path.exists(curve):
        x, y, z = read_xyz(curve)
        ax.scatter(x, y, z, s=1.5, c="white", edgecolors="black", linewidths=0.2,
                   label="constraint h = 0")

    for name, color in (("unconstrained", "tab:red"), ("constrained", "tab:blue")):
        for i, path in enumerate(sorted(glob.glob(os.path.join(out_dir, name + "_*.csv")))):
            x, y, z = read_xyz(path)
            ax.plot(x, y, z, color=color, lw=0.8, alpha=0.8,
                    label=name if i == 0 else None)

    ax.set_box_aspect((1, 1, 1))
    ax.legend(loc="upper left")
    fig.savefig(target, dpi=150, bbox_inches="tight")
    print("wrote", target)


if __name__ == "__main__":
    main()
