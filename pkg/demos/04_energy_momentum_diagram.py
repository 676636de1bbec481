"""Scaled energy-momentum diagram: dashed infinity curves plus the minimal branch.

In scaling-invariant coordinates h = H (l1+l2)^2 and k = l1 l2 / (l1+l2)^2,
each pair's cluster-at-infinity energies trace a dashed curve
(h, k) = (C_ij chi^-2, chi(1-chi)); the numerically recovered branch of
energy minimizers runs just below the lowest of them and merges with it as
k -> 0.  Writes diagram.csv; renders diagram.png when matplotlib is present.
"""

import csv
import os

from threebody4d.cli import main as cli

OUT = os.path.join(os.path.dirname(__file__), "diagram.csv")

cli([
    "diagram",
    "--masses", "1/2,1/3,1/6",
    "--chi-steps", "150",
    "--k-grid", "0.005:0.25:8",
    "--restarts", "8",
    "--seed", "0",
    "--out", OUT,
])

rows = []
with open(OUT) as fh:
    for line in fh:
        if line.startswith("#"):
            continue
        rows.append(line.strip().split(","))
header, rows = rows[0], rows[1:]
print(f"{len(rows)} rows: sources {sorted({r[0] for r in rows})}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the plot")
    raise SystemExit(0)

fig, ax = plt.subplots(figsize=(7, 5))
colors = {"1-2": "tab:red", "1-3": "tab:green", "2-3": "tab:blue"}
for pair, color in colors.items():
    pts = sorted(
        (float(r[2]), float(r[3])) for r in rows
        if r[0] == "infinity-curve" and r[1] == pair
    )
    ax.plot(*zip(*pts), "--", color=color, lw=1, label=f"infinity, pair {pair}")
branch = sorted((float(r[2]), float(r[3])) for r in rows if r[0] == "minimal-branch")
ax.plot(*zip(*branch), "k.-", lw=1.5, label="minimal branch (computed)")
ax.set_xlabel("k = l1 l2 / (l1 + l2)^2")
ax.set_ylabel("h = H (l1 + l2)^2")
ax.set_xlim(0, 0.26)
ax.set_ylim(-0.3, 0.02)
ax.legend(fontsize=8)
ax.set_title("critical curves at infinity (dashed) and the energy-minimum branch")
png = os.path.join(os.path.dirname(__file__), "diagram.png")
fig.savefig(png, dpi=150, bbox_inches="tight")
print(f"wrote {png}")
