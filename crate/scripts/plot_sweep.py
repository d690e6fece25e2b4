#!/usr/bin/env python3
"""Plot a diffest sweep or csl CSV on log-log axes.

    diffest sweep -c configs/lambda_sweep.toml -o lambda.csv
    python3 scripts/plot_sweep.py lambda.csv lambda.png

Every column ending in ":std[...]" or ":lambda_min[...]" becomes a curve;
"degenerate" and "na" cells are skipped. Requires matplotlib.
"""

import csv
import sys

import matplotlib.pyplot as plt


def read(path):
    with open(path) as f:
        rows = [line for line in f if not line.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    return header, list(reader)


def main():
    if len(sys.argv) not in (2, 3):
        sys.exit(__doc__)
    header, rows = read(sys.argv[1])
    x = [float(r[0]) for r in rows]
    fig, ax = plt.subplots(figsize=(7, 5))
    for j, name in enumerate(header):
        if ":std[" not in name and ":lambda_min[" not in name:
            continue
        pts = [(xi, float(r[j])) for xi, r in zip(x, rows) if r[j] not in ("degenerate", "na")]
        if pts:
            ax.loglog(*zip(*pts), label=name.split(":")[0])
    if "overlay:lambda[s^-1]" in header:
        k = header.index("overlay:lambda[s^-1]")
        pts = [(xi, float(r[k])) for xi, r in zip(x, rows) if r[k] not in ("degenerate", "na")]
        if pts:
            ax.loglog(*zip(*pts), "k--", label="overlay")
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[4].split(":", 1)[1] if len(header) > 4 else "")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    if len(sys.argv) == 3:
        fig.savefig(sys.argv[2], dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
