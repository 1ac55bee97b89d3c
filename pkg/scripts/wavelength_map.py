"""Wavelength-angle intensity maps with loops off and on, side by side.

    python3 scripts/wavelength_map.py --config configs/wavelength_map.cfg --out runs/wavelength_map
"""

import argparse
from pathlib import Path

import numpy as np

from slitloops import SweepSpec, sweep
from slitloops.config import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/wavelength_map.cfg")
    ap.add_argument("--out", default="runs/wavelength_map")
    args = ap.parse_args()

    cfg = parse_config(Path(args.config).read_text())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    maps = {}
    for loops in (False, True):
        spec = SweepSpec(
            kind="intensity_map",
            wavelengths_m=cfg.sweep.wavelengths_m,
            slits=cfg.slits,
            coupling=cfg.coupling_table or cfg.coupling,
            grid=cfg.grid(),
            slit_amplitudes=cfg.illum.slit_amplitudes,
            loops=loops,
        )
        res = maps["on" if loops else "off"] = sweep(spec)
        header = "wavelength_m," + ",".join(f"theta_rad={t:.17g}" for t in res.axis2)
        table = np.column_stack([res.axis1, res.values])
        np.savetxt(out / f"intensity_loops_{'on' if loops else 'off'}.csv", table, delimiter=",", header=header, comments="", fmt="%.17g")

    on, off = maps["on"].values, maps["off"].values
    rel = np.max(np.abs(on - off), axis=1) / np.max(off, axis=1)
    print(f"max |on - off| / max(off) per wavelength: min {rel.min():.3f}, max {rel.max():.3f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
    for ax, (name, res) in zip(axes, maps.items()):
        ax.pcolormesh(res.axis2, res.axis1 * 1e9, res.values, shading="auto")
        ax.set_title(f"loops {name}")
        ax.set_xlabel("theta (rad)")
    axes[0].set_ylabel("wavelength (nm)")
    fig.tight_layout()
    fig.savefig(out / "wavelength_map.svg")


if __name__ == "__main__":
    main()
