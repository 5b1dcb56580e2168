"""Command line front end: SER sweeps, codebook design, hybrid runs, traces.

Examples:
    scma-sim sweep --system 6x4 --channel awgn --link downlink \\
        --snr 0:2:12 --trials 200000 --max-iters 10 --seed 42 --out ser.csv
    scma-sim design --snr-db 10 --grid-step 1 --out designed.cbk
    scma-sim hma --snr 0:3:30 --trials 50000 --out hma.csv
    scma-sim trace --max-iters 1
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from scma_sim import design, reference_trace
from scma_sim.codebook import format_codebook_set
from scma_sim.harness import (
    CHANNEL_CHOICES,
    LINK_CHOICES,
    SYSTEM_CHOICES,
    SimConfig,
    emit_csv,
    emit_plot_data,
    run_sweep,
)
from scma_sim.hma import HmaRunConfig, hma_overloading, pd_noma_pair_errors
from scma_sim.mpa import DetectorConfig


def parse_snr_spec(text: str) -> tuple[float, ...]:
    """Parse 'start:step:stop' (inclusive) or a comma-separated dB list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"bad SNR range {text!r}")
        n = int(round((stop - start) / step)) + 1
        return tuple(start + i * step for i in range(n))
    return tuple(float(p) for p in text.split(","))


def _add_sweep_args(sub, hma_defaults: bool):
    sub.add_argument("--snr", default="0:3:30" if hma_defaults else "0:2:12",
                     help="SNR points: start:step:stop or comma list (dB)")
    sub.add_argument("--trials", type=int, default=200_000, help="trials per SNR point")
    sub.add_argument("--max-iters", type=int, default=10, help="detector iteration cap")
    sub.add_argument("--tol", type=float, default=1e-6, help="posterior convergence tolerance")
    sub.add_argument("--seed", type=int, default=42, help="master RNG seed")
    sub.add_argument("--early-stop", type=int, default=500,
                     help="stop a point after this many symbol errors")
    sub.add_argument("--workers", type=int, default=1, help="worker processes")
    sub.add_argument("--out", default=None, help="CSV output path")
    sub.add_argument("--plot-out", default=None, help="two-column plot data path")


def _run_and_emit(cfg: SimConfig, args) -> None:
    records = run_sweep(cfg)
    print(f"# system={cfg.system} channel={cfg.channel} link={cfg.link} seed={cfg.seed}")
    print(f"{'snr_db':>8} {'trials':>9} {'errors':>8} {'ser':>12} {'secs':>8}")
    for r in records:
        print(f"{r.snr_db:8.2f} {r.trials:9d} {r.symbol_errors:8d} "
              f"{r.ser:12.3e} {r.wall_time:8.2f}")
    if args.out:
        emit_csv(records, args.out, cfg.seed)
        print(f"wrote {args.out}")
    if args.plot_out:
        emit_plot_data(records, args.plot_out)
        print(f"wrote {args.plot_out}")


def _cmd_sweep(args) -> int:
    cfg = SimConfig(
        system=args.system,
        channel=args.channel,
        link=args.link,
        snr_points=parse_snr_spec(args.snr),
        trials_per_point=args.trials,
        detector=DetectorConfig(max_iterations=args.max_iters, convergence_tol=args.tol),
        seed=args.seed,
        codebook_path=args.codebook,
        early_stop_errors=args.early_stop,
        workers=args.workers,
    )
    _run_and_emit(cfg, args)
    return 0


def _cmd_hma(args) -> int:
    run = HmaRunConfig(
        j1=args.j1,
        j2=args.j2,
        strong_power_total=args.strong_power,
        weak_power_total=args.weak_power,
        weak_gain_factor=args.weak_gain_factor,
        subtract_with_weak_gains=args.subtract_with_weak_gains,
    )
    cfg = SimConfig(
        system="hma",
        channel=args.channel,
        snr_points=parse_snr_spec(args.snr),
        trials_per_point=args.trials,
        detector=DetectorConfig(max_iterations=args.max_iters, convergence_tol=args.tol),
        seed=args.seed,
        hma=run,
        early_stop_errors=args.early_stop,
        workers=args.workers,
    )
    lam = hma_overloading(run.j1, run.j2, 4)
    print(f"# hybrid run: J1={run.j1} J2={run.j2} overloading={lam:.0f}% "
          f"split {run.strong_power_total}:{run.weak_power_total}")
    _run_and_emit(cfg, args)
    if args.baseline_out:
        _emit_pd_noma_baseline(args)
    return 0


def _emit_pd_noma_baseline(args) -> None:
    # K independent two-user power-domain pairs; per-pair SER is identical in
    # distribution, so one pair is simulated and reported (200% overloading).
    from scma_sim.channel import n0_from_ebn0
    from scma_sim.harness import SerRecord

    records = []
    for p, snr in enumerate(parse_snr_spec(args.snr)):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=args.seed, spawn_key=(10_000 + p,)))
        errs = pd_noma_pair_errors(
            rng, n0_from_ebn0(snr), args.trials,
            strong_power=args.strong_power, weak_power=args.weak_power,
            weak_gain_factor=args.weak_gain_factor,
            rayleigh=args.channel == "rayleigh")
        records.append(SerRecord(
            snr_db=snr, trials=args.trials,
            symbol_errors=int(errs.sum()),
            ser=float(errs.mean())))
    emit_csv(records, args.baseline_out, args.seed)
    print(f"wrote {args.baseline_out} (two-user power-domain baseline)")


def _cmd_design(args) -> int:
    mother = design.pam_mother(args.order, unit_energy=True)
    n0 = 10.0 ** (-args.snr_db / 10.0)
    result = design.optimize_rotation_angles(mother, n0, grid_step_deg=args.grid_step)
    t2, t3 = np.deg2rad(result.theta2_deg), np.deg2rad(result.theta3_deg)
    u1 = design.UserConstellation(mother.points, label=1)
    u2 = design.UserConstellation(design.rotate(mother, t2).points, label=2)
    u3 = design.UserConstellation(design.rotate(mother, t3).points, label=3)
    indicator = design.bundled_indicator()
    cbs = design.assemble_codebooks([u1, u2, u3], design.IndicatorMatrix(indicator.labels))

    lines = [
        f"angle search: theta2={result.theta2_deg:.1f} deg, "
        f"theta3={result.theta3_deg:.1f} deg at {args.snr_db} dB "
        f"(grid step {args.grid_step} deg)",
        f"lower-bound mutual information at optimum: {result.objective:.4f} bits",
    ]
    pairs = [("1+2", [u1, u2]), ("1+3", [u1, u3]), ("2+3", [u2, u3])]
    for name, cs in pairs:
        gain = design.shaping_gain(design.sum_alphabet(cs).values)
        lines.append(f"shaping gain of sum alphabet {name}: {gain:.4f}")
    full = design.sum_alphabet([u1, u2, u3])
    lines.append(f"shaping gain of full sum alphabet: "
                 f"{design.shaping_gain(full.values):.4f}")

    report = "\n".join(lines)
    print(report)
    if args.out:
        text = format_codebook_set(
            cbs, header_comment="designed codebook set\n" + report, ndigits=args.digits)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
        print(f"wrote {args.report}")
    return 0


def _cmd_trace(args) -> int:
    text = "\n".join(reference_trace.trace_lines(max_iterations=args.max_iters))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scma-sim",
        description="SCMA link-level simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="Monte Carlo SER sweep over SNR")
    sweep.add_argument("--system", choices=SYSTEM_CHOICES, default="6x4")
    sweep.add_argument("--channel", choices=CHANNEL_CHOICES, default="awgn")
    sweep.add_argument("--link", choices=LINK_CHOICES, default="downlink")
    sweep.add_argument("--codebook", default=None,
                       help="codebook file path (default: the system's bundled set)")
    _add_sweep_args(sweep, hma_defaults=False)
    sweep.set_defaults(func=_cmd_sweep)

    hma = sub.add_parser("hma", help="hybrid two-group sweep with SIC receivers")
    hma.add_argument("--channel", choices=CHANNEL_CHOICES, default="rayleigh")
    hma.add_argument("--j1", type=int, default=6, help="strong-group users")
    hma.add_argument("--j2", type=int, default=6, help="weak-group users")
    hma.add_argument("--strong-power", type=float, default=0.2)
    hma.add_argument("--weak-power", type=float, default=0.8)
    hma.add_argument("--weak-gain-factor", type=float, default=0.5,
                     help="amplitude factor on far users' gains")
    hma.add_argument("--subtract-with-weak-gains", action="store_true",
                     help="cancel through the weak users' own gain vectors")
    hma.add_argument("--baseline-out", default=None,
                     help="also write a two-user power-domain baseline CSV here")
    _add_sweep_args(hma, hma_defaults=True)
    hma.set_defaults(func=_cmd_hma)

    des = sub.add_parser("design", help="rotation-angle search and codebook emission")
    des.add_argument("--order", type=int, default=4, help="modulation order M")
    des.add_argument("--snr-db", type=float, default=10.0, help="design operating point")
    des.add_argument("--grid-step", type=float, default=1.0, help="grid step in degrees")
    des.add_argument("--digits", type=int, default=6, help="precision in the emitted file")
    des.add_argument("--out", default=None, help="codebook file output path")
    des.add_argument("--report", default=None, help="design report output path")
    des.set_defaults(func=_cmd_design)

    trace = sub.add_parser("trace", help="dump the bundled reference detection trace")
    trace.add_argument("--max-iters", type=int, default=1)
    trace.add_argument("--out", default=None)
    trace.set_defaults(func=_cmd_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
