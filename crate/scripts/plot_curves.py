"""Mean l1 error against the swept parameter, one line per mechanism and pipeline.

    python scripts/plot_curves.py results/slot_sweep.csv -o slot_sweep.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("table", help="CSV or JSON written by `mcldp run`")
    ap.add_argument("-o", "--out", default="curves.png")
    ap.add_argument("--xlabel", default="axis value")
    ap.add_argument("--logy", action="store_true")
    args = ap.parse_args()

    if args.table.endswith(".json"):
        df = pd.read_json(args.table)
    else:
        df = pd.read_csv(args.table)

    curves = (
        df.groupby(["mechanism", "coded", "axis_value"])["l1_mean"]
        .agg(["mean", "sem"])
        .reset_index()
    )
    fig, ax = plt.subplots(figsize=(6, 4))
    for (mech, coded), g in curves.groupby(["mechanism", "coded"]):
        style = "--" if coded == "rlim" else "-"
        label = f"{mech} (RLIM)" if coded == "rlim" else mech
        ax.errorbar(g["axis_value"], g["mean"], yerr=g["sem"].fillna(0), fmt=style, marker="o", ms=3, label=label)
    ax.set_xlabel(args.xlabel)
    ax.set_ylabel("average $\\ell_1$ error")
    if args.logy:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
