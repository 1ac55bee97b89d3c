"""Fringe visibility when only slit A is lit, as a function of hop strength.

With no hops the pattern is one sinc envelope and has no fringes. Each hop
carries part of the field to another slit, so fringes appear.

    python3 scripts/single_slit_visibility.py --out runs/visibility
"""

import argparse
from pathlib import Path

import numpy as np

from slitloops import DetectorGrid, Illumination, total_pattern, visibility
from slitloops.config import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/three_slit.cfg")
    ap.add_argument("--out", default="runs/single_slit_visibility")
    ap.add_argument("--window", type=float, default=0.35, help="half-width of the visibility window, rad")
    args = ap.parse_args()

    cfg = parse_config(Path(args.config).read_text())
    grid = DetectorGrid.linspace(cfg.theta_min, cfg.theta_max, max(cfg.points, 1024))
    lit = (1.0,) + (0.0,) * (cfg.slits.slit_count - 1)
    illum = Illumination(cfg.illum.wavelength_m, lit)
    base = cfg.coupling_for(cfg.illum.wavelength_m)
    window = (-args.window, args.window)
    full = cfg.slits.full_mask()

    scales = np.linspace(0.0, 2.0, 41)
    vis = np.array([visibility(total_pattern(cfg.slits, full, illum, base.scaled(s), grid), window) for s in scales])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "visibility.csv", np.column_stack([scales, vis]), delimiter=",", header="hop_scale,visibility", comments="", fmt="%.17g")
    print(f"visibility: loops off {vis[0]:.4f}, reference coupling {vis[20]:.4f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    on = total_pattern(cfg.slits, full, illum, base, grid).probabilities
    off = total_pattern(cfg.slits, full, illum, base.with_max_hops(0), grid).probabilities
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    a.plot(grid.theta_rad, off, "--", lw=1, label="loops off")
    a.plot(grid.theta_rad, on, lw=1, label="loops on")
    a.set_xlabel("theta (rad)")
    a.set_ylabel("P")
    a.legend(fontsize="small")
    b.plot(scales, vis, ".-")
    b.set_xlabel("hop scale s")
    b.set_ylabel("visibility")
    fig.tight_layout()
    fig.savefig(out / "single_slit_visibility.svg")


if __name__ == "__main__":
    main()
