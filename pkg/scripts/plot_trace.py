"""Plot node scores from a trace.csv written by `vmtopsis simulate`.

    python3 scripts/plot_trace.py out/trace.csv --events out/events.csv -o scores.png

Needs matplotlib (`pip install .[plot]`). The CSVs are the contract; this
is only a convenience view of them.
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("trace")
    ap.add_argument("--events")
    ap.add_argument("--threshold", type=float, default=75.0)
    ap.add_argument("-o", "--output", default="scores.png")
    args = ap.parse_args()

    with open(args.trace, newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = [float(r["time_s"]) for r in rows]
    nodes = [c[: -len("_score")] for c in rows[0] if c.endswith("_score")]

    fig, ax = plt.subplots(figsize=(8, 4))
    for n in nodes:
        ax.plot(t, [float(r[f"{n}_score"]) for r in rows], label=n)
    ax.axhline(args.threshold, color="k", ls="--", lw=1, label="threshold")
    if args.events:
        with open(args.events, newline="") as fh:
            for ev in csv.DictReader(fh):
                ax.axvline(float(ev["trigger_time_s"]), color="grey", lw=0.8)
                ax.annotate(f'{ev["vm"]}->{ev["destination"]}', (float(ev["trigger_time_s"]), 2), fontsize=8)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("score (0-100)")
    ax.set_ylim(0, 100)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
