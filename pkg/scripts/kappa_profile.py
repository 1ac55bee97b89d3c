"""kappa(theta) for the reference three-slit structure, checked against the scalar oracle.

    python3 scripts/kappa_profile.py --config configs/three_slit.cfg --out runs/kappa
"""

import argparse
from pathlib import Path

import numpy as np

from slitloops import kappa_at_center, sorkin_analysis
from slitloops import oracle
from slitloops.config import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/three_slit.cfg")
    ap.add_argument("--out", default="runs/kappa_profile")
    ap.add_argument("--max-hops", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args()

    cfg = parse_config(Path(args.config).read_text())
    grid = cfg.grid()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    columns = {"theta_rad": grid.theta_rad}
    for m in args.max_hops:
        coupling = cfg.coupling_for(cfg.illum.wavelength_m).with_max_hops(m)
        res = sorkin_analysis(cfg.slits, cfg.illum, coupling, grid)
        columns[f"kappa_M{m}"] = res.kappa
        line = f"M={m}: I_max={res.i_max:.6f} kappa(centre)={kappa_at_center(res):+.6f}"
        if m == 1:
            ref = oracle.sorkin(cfg.slits, cfg.illum, coupling, [float(t) for t in grid.theta_rad])
            line += f" max|kappa-oracle|={np.max(np.abs(res.kappa - ref['kappa'])):.1e}"
        print(line)

    table = np.column_stack(list(columns.values()))
    np.savetxt(out / "kappa_profile.csv", table, delimiter=",", header=",".join(columns), comments="", fmt="%.17g")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for name, col in columns.items():
        if name != "theta_rad":
            ax.plot(np.sin(grid.theta_rad), col, lw=1, label=name)
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel("sin(theta)")
    ax.set_ylabel("kappa")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out / "kappa_profile.svg")


if __name__ == "__main__":
    main()
