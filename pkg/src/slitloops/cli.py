"""Command-line front end: ``slitloops {pattern,sorkin,sweep,validate} --config FILE --out DIR``.

Exit codes: 0 success, 1 validation failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import oracle
from .config import ConfigError, ScenarioConfig, check_config, parse_config
from .loops import total_pattern
from .model import Mask, ModelError
from .propagation import converge_huygens
from .sorkin import SORKIN_LABELS, SweepSpec, kappa_at_center, sorkin_analysis, sweep

log = logging.getLogger("slitloops")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
CSV_SCHEMA_VERSION = 1
COMMANDS = ("pattern", "sorkin", "sweep", "validate")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


class OutputSet:
    """Files written by one run. Each file is written to a temporary name and
    renamed into place; :meth:`discard` removes everything on failure."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def write_csv(self, name: str, schema: str, header: Sequence[str], rows) -> Path:
        path = self.out_dir / name
        tmp = path.with_name(path.name + ".part")
        self.written.append(tmp)
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# schema=slitloops.{schema}/{CSV_SCHEMA_VERSION}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
        os.replace(tmp, path)
        self.written[-1] = path
        return path

    def discard(self) -> None:
        for p in self.written:
            try:
                p.unlink()
            except FileNotFoundError:
                pass
        self.written.clear()


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


def _pattern(cfg: ScenarioConfig, out: OutputSet) -> None:
    grid = cfg.grid()
    coupling = cfg.coupling_for(cfg.illum.wavelength_m)
    labels = cfg.mask_labels()
    pats = [total_pattern(cfg.slits, Mask.from_label(lab), cfg.illum, coupling, grid) for lab in labels]
    rows = zip(grid.theta_rad, *(p.probabilities for p in pats))
    out.write_csv("pattern.csv", "pattern", ["theta_rad"] + [f"P_{lab}" for lab in labels], rows)
    for lab, p in zip(labels, pats):
        out.write_csv(
            f"mask_{lab}.csv",
            "mask",
            ["theta_rad", "re_psi", "im_psi", "P"],
            zip(grid.theta_rad, p.amplitudes.real, p.amplitudes.imag, p.probabilities),
        )
    if cfg.plot:
        _plot_lines(out, f"pattern.{cfg.plot_format}", grid.theta_rad, {f"P_{l}": p.probabilities for l, p in zip(labels, pats)}, "P")


def _sorkin(cfg: ScenarioConfig, out: OutputSet) -> None:
    grid = cfg.grid()
    coupling = cfg.coupling_for(cfg.illum.wavelength_m)
    res = sorkin_analysis(cfg.slits, cfg.illum, coupling, grid)
    probs = [res.per_mask[lab].probabilities for lab in SORKIN_LABELS]
    out.write_csv(
        "sorkin.csv",
        "sorkin",
        ["theta_rad"] + [f"P_{lab}" for lab in SORKIN_LABELS] + ["epsilon", "kappa"],
        zip(grid.theta_rad, *probs, res.epsilon, res.kappa),
    )
    for lab in SORKIN_LABELS:
        p = res.per_mask[lab]
        out.write_csv(
            f"mask_{lab}.csv",
            "mask",
            ["theta_rad", "re_psi", "im_psi", "P"],
            zip(grid.theta_rad, p.amplitudes.real, p.amplitudes.imag, p.probabilities),
        )
    ref = oracle.sorkin(cfg.slits, cfg.illum, coupling, [float(t) for t in grid.theta_rad])
    out.write_csv(
        "sorkin_oracle.csv",
        "sorkin_oracle",
        ["theta_rad", "epsilon", "kappa"],
        zip(grid.theta_rad, ref["epsilon"], ref["kappa"]),
    )
    out.write_csv(
        "sorkin_summary.csv",
        "sorkin_summary",
        ["quantity", "value"],
        [
            ("i_max", res.i_max),
            ("theta_at_max_rad", res.theta_at_max),
            ("kappa_center_mean", kappa_at_center(res)),
            ("max_abs_kappa_minus_oracle", float(np.max(np.abs(res.kappa - np.asarray(ref["kappa"]))))),
        ],
    )
    if cfg.plot:
        _plot_lines(out, f"sorkin.{cfg.plot_format}", grid.theta_rad, {"kappa": res.kappa}, "kappa")


def _sweep(cfg: ScenarioConfig, out: OutputSet, loops: bool) -> None:
    if not cfg.sweep.wavelengths_m:
        raise ConfigError("sweep: the wavelength axis is empty (set sweep.wavelengths or wavelength_start/stop/count)")
    spec = SweepSpec(
        kind=cfg.sweep.kind,
        wavelengths_m=cfg.sweep.wavelengths_m,
        slits=cfg.slits,
        coupling=cfg.coupling_table if cfg.coupling_table is not None else cfg.coupling,
        grid=cfg.grid(),
        slit_amplitudes=cfg.illum.slit_amplitudes,
        widths_m=cfg.sweep.widths_m,
        loops=loops,
    )
    res = sweep(spec)
    header = [res.axis1_name] + [f"{res.axis2_name}={fmt(v)}" for v in res.axis2]
    rows = ([a, *vals] for a, vals in zip(res.axis1, res.values))
    out.write_csv(f"sweep_{res.kind}.csv", f"sweep.{res.kind}", header, rows)
    if cfg.plot:
        _plot_map(out, f"sweep_{res.kind}.{cfg.plot_format}", res)


def validation_checks(cfg: ScenarioConfig) -> list[Check]:
    """Null test, oracle equivalence, expansion identity and Huygens composition."""
    grid = cfg.grid()
    coupling = cfg.coupling_for(cfg.illum.wavelength_m)
    checks = []
    if cfg.slits.slit_count == 3:
        null = sorkin_analysis(cfg.slits, cfg.illum, coupling.scaled(0.0), grid)
        checks.append(Check("born_rule_null max|kappa|", float(np.max(np.abs(null.kappa))), 1e-12))

        res = sorkin_analysis(cfg.slits, cfg.illum, coupling, grid)
        thetas = [float(t) for t in grid.theta_rad]
        ref = oracle.sorkin(cfg.slits, cfg.illum, coupling, thetas)
        diff = np.max(np.abs(res.epsilon - np.asarray(ref["epsilon"]))) / res.i_max
        checks.append(Check("oracle_equivalence max|eps-eps_oracle|/I_max", float(diff), 1e-10))

        if coupling.max_hops == 1:
            idx = np.linspace(0, len(thetas) - 1, min(64, len(thetas))).astype(int)
            expansion = np.array([oracle.epsilon_loop_terms(cfg.slits, cfg.illum, coupling, thetas[i]) for i in idx])
            diff = np.max(np.abs(res.epsilon[idx] - expansion)) / res.i_max
            checks.append(Check("epsilon_expansion max|eps-loop_terms|/I_max", float(diff), 1e-10))

    lam = cfg.illum.wavelength_m
    conv = converge_huygens(2 * np.pi / lam, (0.0, 0.0), (0.0, 200 * lam), 100 * lam)
    checks.append(Check("huygens_composition on-axis residual", conv.residual, 1e-2))
    return checks


def _validate(cfg: ScenarioConfig, out: OutputSet) -> int:
    checks = validation_checks(cfg)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: residual={c.residual:.3e} tol={c.tolerance:.0e}")
    out.write_csv(
        "validate.csv",
        "validate",
        ["check", "residual", "tolerance", "passed"],
        [(c.name, c.residual, c.tolerance, str(c.passed).lower()) for c in checks],
    )
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


def _plot_lines(out: OutputSet, name: str, x, series: dict, ylabel: str) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib unavailable, skipping %s", name)
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, label=label, lw=1)
    ax.set_xlabel("theta (rad)")
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend(fontsize="small")
    path = out.out_dir / name
    out.written.append(path)
    fig.savefig(path)
    plt.close(fig)


def _plot_map(out: OutputSet, name: str, res) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib unavailable, skipping %s", name)
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(res.axis2, res.axis1 * 1e9, res.values, shading="auto")
    fig.colorbar(mesh, ax=ax, label=res.kind)
    ax.set_xlabel(res.axis2_name)
    ax.set_ylabel("wavelength (nm)")
    path = out.out_dir / name
    out.written.append(path)
    fig.savefig(path)
    plt.close(fig)


def run_scenario(
    cfg: ScenarioConfig,
    command: str,
    out_dir: str | os.PathLike,
    loops: bool = True,
) -> int:
    """Run one command and write its artifacts into ``out_dir``; returns the exit status.

    Any failure removes the files this run already wrote.
    """
    if command not in COMMANDS:
        raise ValueError(f"command must be one of {COMMANDS}")
    cfg = cfg.with_loops(loops)
    out = OutputSet(Path(out_dir))
    try:
        out.out_dir.mkdir(parents=True, exist_ok=True)
        if command == "pattern":
            _pattern(cfg, out)
            status = EXIT_OK
        elif command == "sorkin":
            _sorkin(cfg, out)
            status = EXIT_OK
        elif command == "sweep":
            _sweep(cfg, out, loops)
            status = EXIT_OK
        else:
            status = _validate(cfg, out)
    except (ConfigError, ModelError) as exc:
        out.discard()
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        out.discard()
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BaseException:
        out.discard()
        raise
    if status != EXIT_OK and command != "validate":
        out.discard()
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario file")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--loops", choices=("on", "off"), default=None, help="force looped paths on or off")
    common.add_argument("--max-hops", type=int, default=None, metavar="M", help="override coupling.max_hops")
    common.add_argument("--plot", action="store_true", help="also write a vector plot")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="slitloops",
        description="Multi-slit far-field interference with looped (plasmon-hop) paths and the Sorkin parameter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "pattern": "per-mask far-field probabilities",
        "sorkin": "epsilon and kappa from the seven three-slit masks",
        "sweep": "wavelength (and width) sweeps as a 2D map",
        "validate": "null, oracle and Huygens checks; exit 1 on failure",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"I/O error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
        if args.max_hops is not None:
            if args.max_hops < 0:
                raise ConfigError("--max-hops must be >= 0")
            cfg = cfg.with_max_hops(args.max_hops)
            check_config(cfg)
        if args.plot:
            cfg = replace(cfg, plot=True)
    except (ConfigError, ModelError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    loops = args.loops != "off"
    log.info("running %s with %s", args.command, args.config)
    return run_scenario(cfg, args.command, args.out, loops=loops)


if __name__ == "__main__":
    sys.exit(main())
