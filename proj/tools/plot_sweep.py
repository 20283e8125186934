#!/usr/bin/env python3
"""Plot normalized d' against the swept parameter from `simulate sweep` CSVs.

    python3 tools/plot_sweep.py results_contrast.csv results_ssr.csv -o sweeps.png
"""
import argparse
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from scipy.stats import norm

AXES = {
    "contrast": "effective contrast",
    "l_max": "L_max (cd/m$^2$)",
    "viewing_distance_cm": "viewing distance (cm)",
    "browse_speed": "browsing speed (slices/s)",
}


def swept_column(df):
    for col in ("contrast", "l_max", "ssr", "browse_speed"):
        if df[col].nunique() > 1:
            return col
    return "contrast"


def d_prime_bar(auc, bar):
    # delta method on d' = sqrt(2) * Phi^-1(AUC), as in the text report
    if not 0.0 < auc < 1.0:
        return math.inf
    z = norm.ppf(auc)
    return bar * math.sqrt(2.0) / norm.pdf(z)


def plot(ax, df):
    col = swept_column(df)
    x_col = "viewing_distance_cm" if col == "ssr" else col
    for method, g in df.groupby("method", sort=False):
        g = g.sort_values(x_col)
        d = g["d_prime"].to_numpy()
        finite = np.isfinite(d)
        if not finite.any() or np.nanmax(d[finite]) <= 0:
            continue
        d_max = d[finite].max()
        bars = np.array([d_prime_bar(a, b) for a, b in zip(g["auc"], g["error_bar"])])
        ax.errorbar(g[x_col], d / d_max, yerr=bars / d_max, marker="o", capsize=3, label=method)
    if col in ("contrast", "browse_speed"):
        ax.set_xscale("log")
    ax.set_xlabel(AXES[x_col])
    ax.set_ylabel("normalized d'")
    ax.grid(alpha=0.3)
    ax.legend()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", nargs="+")
    ap.add_argument("-o", "--out", default="sweeps.png")
    args = ap.parse_args()

    fig, axes = plt.subplots(1, len(args.csv), figsize=(4.5 * len(args.csv), 3.8), squeeze=False)
    for ax, path in zip(axes[0], args.csv):
        plot(ax, pd.read_csv(path))
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(args.out)


if __name__ == "__main__":
    main()
