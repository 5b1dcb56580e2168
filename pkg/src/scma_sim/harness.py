"""Monte Carlo SER sweeps over Eb/N0 for the bundled systems and channels.

Reproducibility contract: a sweep is a sequence of fixed-size chunks, and
chunk (point, index) always draws from its own RNG stream derived from the
master seed.  Worker scheduling therefore cannot change any result: chunks
are aggregated in order, and the early-stop decision (enough errors
collected) depends only on that ordered prefix.  The same (config, seed)
pair yields a byte-identical CSV.

Conventions: the SNR axis is Eb/N0 in dB with Eb normalized to 1; "awgn"
runs use unit gains and one shared receive vector per trial with all J
decisions counted; "rayleigh" draws fresh i.i.d. gains per trial, either
per transmitting user at a shared receiver (uplink) or per receiving user
(downlink, where each receiver contributes only its own user's decision).
Average SER is total symbol errors over (trials x decisions per trial).
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from scma_sim.channel import n0_from_ebn0
from scma_sim.hma import (
    HmaConfig,
    HmaRunConfig,
    default_hma_config,
    detect_strong_batch,
    detect_weak_batch,
)
from scma_sim.mpa import DetectorConfig, detect_batch
from scma_sim.systems import build_system

__all__ = [
    "SimConfig",
    "SerRecord",
    "run_trial",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "emit_plot_data",
    "ser_stderr",
    "draw_symbols",
]

SYSTEM_CHOICES = ("6x4", "8x4", "9x6", "hma")
CHANNEL_CHOICES = ("awgn", "rayleigh")
LINK_CHOICES = ("downlink", "uplink")

_TARGET_ENTRIES_PER_CHUNK = 8192


@dataclass
class SimConfig:
    """One sweep: system, channel model, SNR grid, trial budget, seed."""

    system: str = "6x4"
    channel: str = "awgn"
    link: str = "downlink"
    snr_points: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    trials_per_point: int = 200_000
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    seed: int = 0
    codebook_path: str | None = None
    hma: HmaRunConfig = field(default_factory=HmaRunConfig)
    early_stop_errors: int = 500
    workers: int = 1
    zero_noise: bool = False  # testing override: channel adds no noise

    def __post_init__(self):
        if self.system not in SYSTEM_CHOICES:
            raise ValueError(f"system must be one of {SYSTEM_CHOICES}, got {self.system!r}")
        if self.channel not in CHANNEL_CHOICES:
            raise ValueError(f"channel must be one of {CHANNEL_CHOICES}, got {self.channel!r}")
        if self.link not in LINK_CHOICES:
            raise ValueError(f"link must be one of {LINK_CHOICES}, got {self.link!r}")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if len(self.snr_points) == 0:
            raise ValueError("snr_points must be nonempty")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SerRecord:
    """One row of a sweep: counts and the resulting average symbol error rate."""

    snr_db: float
    trials: int
    symbol_errors: int
    ser: float
    wall_time: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.ser <= 1.0:
            raise ValueError(f"ser must lie in [0, 1], got {self.ser}")


def ser_stderr(record: SerRecord, decisions_per_trial: int) -> float:
    """Binomial standard error of the SER estimate, sqrt(p(1-p)/n)."""
    n = record.trials * decisions_per_trial
    p = record.ser
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / n))


def draw_symbols(rng: np.random.Generator, trials: int, users: int, m: int) -> np.ndarray:
    """(trials, users) uniform 1-based data symbols; the harness symbol source."""
    return rng.integers(1, m + 1, size=(trials, users))


def _cnoise(rng, n0, shape):
    scale = np.sqrt(n0 / 2.0)
    return rng.normal(scale=scale, size=shape) + 1j * rng.normal(scale=scale, size=shape)


def _cgain(rng, shape):
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2.0)


_BUNDLE_CACHE: dict = {}


def _bundle_key(cfg: SimConfig):
    h = cfg.hma
    return (cfg.system, cfg.codebook_path,
            (h.j1, h.j2, h.strong_power_total, h.weak_power_total,
             h.weak_gain_factor, h.subtract_with_weak_gains))


def _resolve(cfg: SimConfig):
    key = _bundle_key(cfg)
    bundle = _BUNDLE_CACHE.get(key)
    if bundle is None:
        if cfg.system == "hma":
            bundle = ("hma", default_hma_config(cfg.hma))
        else:
            cbs, fg = build_system(cfg.system, cfg.codebook_path)
            bundle = ("scma", cbs, fg)
        _BUNDLE_CACHE[key] = bundle
    return bundle


def decisions_per_trial(cfg: SimConfig) -> int:
    """Symbol decisions counted per trial (the J of the SER denominator)."""
    bundle = _resolve(cfg)
    if bundle[0] == "hma":
        return bundle[1].j1 + bundle[1].j2
    return bundle[1].user_count


def _entries_per_trial(cfg: SimConfig) -> int:
    """Detector batch entries one trial expands to (for chunk sizing)."""
    bundle = _resolve(cfg)
    if bundle[0] == "hma":
        hc = bundle[1]
        return 2 * hc.j1 + hc.j2
    if cfg.channel == "rayleigh" and cfg.link == "downlink":
        return bundle[1].user_count
    return 1


def _chunk_size(cfg: SimConfig) -> int:
    per_trial = _entries_per_trial(cfg)
    return max(64, min(8192, _TARGET_ENTRIES_PER_CHUNK // per_trial))


def _scma_chunk(cbs, fg, cfg: SimConfig, n0: float, rng, size: int) -> np.ndarray:
    """(size, J) boolean error indicators for one chunk of trials."""
    j, k, m = cbs.user_count, cbs.resource_count, cbs.modulation_order
    x = cbs.as_array()                     # (J, M, K)
    powers = np.ones(j)
    symbols = draw_symbols(rng, size, j, m)
    tx = x[np.arange(j)[None, :], symbols - 1]   # (size, J, K)

    if cfg.channel == "awgn":
        y = tx.sum(axis=1)
        if not cfg.zero_noise:
            y = y + _cnoise(rng, n0, (size, k))
        gains = np.ones((size, k, j), dtype=complex)
        det = detect_batch(y, gains, powers, cbs, fg, n0, cfg.detector)
        return det.symbols != symbols

    if cfg.link == "uplink":
        h = _cgain(rng, (size, j, k))      # per transmitting user
        y = (h * tx).sum(axis=1)
        if not cfg.zero_noise:
            y = y + _cnoise(rng, n0, (size, k))
        det = detect_batch(y, h.transpose(0, 2, 1).copy(), powers, cbs, fg, n0, cfg.detector)
        return det.symbols != symbols

    # downlink: every user has its own receiver and fading draw; each
    # receiver detects everyone but contributes only its own decision.
    h = _cgain(rng, (size, j, k))          # row i is receiver i's channel
    r = tx.sum(axis=1)                     # (size, K)
    y = h * r[:, None, :]
    if not cfg.zero_noise:
        y = y + _cnoise(rng, n0, (size, j, k))
    yb = y.reshape(size * j, k)
    hb = h.reshape(size * j, k)
    gains = np.repeat(hb[:, :, None], j, axis=2)
    det = detect_batch(yb, gains, powers, cbs, fg, n0, cfg.detector)
    dec = det.symbols.reshape(size, j, j)
    kept = dec[:, np.arange(j), np.arange(j)]
    return kept != symbols


def _hma_chunk(hc: HmaConfig, cfg: SimConfig, n0: float, rng, size: int) -> np.ndarray:
    """(size, J1+J2) error indicators for one chunk of hybrid trials."""
    run = cfg.hma
    j1, j2, k = hc.j1, hc.j2, hc.resource_count
    m = hc.group1.modulation_order
    xs, xw = hc.group1.as_array(), hc.group2.as_array()

    symbols = draw_symbols(rng, size, j1 + j2, m)
    ss, sw = symbols[:, :j1], symbols[:, j1:]
    tx_s = xs[np.arange(j1)[None, :], ss - 1]
    tx_w = xw[np.arange(j2)[None, :], sw - 1]
    x = ((np.sqrt(hc.strong_powers)[None, :, None] * tx_s).sum(axis=1)
         + (np.sqrt(hc.weak_powers)[None, :, None] * tx_w).sum(axis=1))

    if cfg.channel == "rayleigh":
        h_s = _cgain(rng, (size, j1, k))
        h_w = _cgain(rng, (size, j2, k)) * run.weak_gain_factor
    else:
        h_s = np.ones((size, j1, k), dtype=complex)
        h_w = np.full((size, j2, k), run.weak_gain_factor, dtype=complex)
    y_s = h_s * x[:, None, :]
    y_w = h_w * x[:, None, :]
    if not cfg.zero_noise:
        y_s = y_s + _cnoise(rng, n0, (size, j1, k))
        y_w = y_w + _cnoise(rng, n0, (size, j2, k))

    # strong receivers: SIC then own-group detection, keep own decision
    y_flat = y_s.reshape(size * j1, k)
    h_flat = h_s.reshape(size * j1, k)
    weak_gains = None
    if run.subtract_with_weak_gains:
        weak_gains = np.repeat(h_w[:, None, :, :], j1, axis=1).reshape(size * j1, j2, k)
    strong_dec, _ = detect_strong_batch(
        y_flat, h_flat, hc, n0, cfg.detector,
        subtract_with_weak_gains=run.subtract_with_weak_gains,
        weak_gains=weak_gains)
    kept_s = strong_dec.reshape(size, j1, j1)[:, np.arange(j1), np.arange(j1)]

    # weak receivers: direct detection, strong signal treated as noise
    weak_dec = detect_weak_batch(y_w.reshape(size * j2, k),
                                 h_w.reshape(size * j2, k), hc, n0, cfg.detector)
    kept_w = weak_dec.reshape(size, j2, j2)[:, np.arange(j2), np.arange(j2)]

    return np.concatenate([kept_s != ss, kept_w != sw], axis=1)


def _chunk_error_matrix(cfg: SimConfig, snr_db: float, point_idx: int,
                        chunk_idx: int, size: int) -> np.ndarray:
    """Error indicators for chunk (point_idx, chunk_idx); the RNG stream is a
    pure function of (seed, point, chunk), independent of scheduling."""
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(point_idx, chunk_idx)))
    n0 = n0_from_ebn0(snr_db)
    bundle = _resolve(cfg)
    if bundle[0] == "hma":
        return _hma_chunk(bundle[1], cfg, n0, rng, size)
    return _scma_chunk(bundle[1], bundle[2], cfg, n0, rng, size)


def _chunk_errors(cfg: SimConfig, snr_db: float, point_idx: int,
                  chunk_idx: int, size: int) -> int:
    return int(_chunk_error_matrix(cfg, snr_db, point_idx, chunk_idx, size).sum())


def run_trial(cfg: SimConfig, rng: np.random.Generator,
              snr_db: float | None = None) -> np.ndarray:
    """One trial at ``snr_db`` (default: the first sweep point); returns the
    per-user error indicator vector using the caller's RNG."""
    snr = cfg.snr_points[0] if snr_db is None else snr_db
    n0 = n0_from_ebn0(snr)
    bundle = _resolve(cfg)
    if bundle[0] == "hma":
        return _hma_chunk(bundle[1], cfg, n0, rng, 1)[0]
    return _scma_chunk(bundle[1], bundle[2], cfg, n0, rng, 1)[0]


def _chunk_plan(cfg: SimConfig) -> list[int]:
    size = _chunk_size(cfg)
    full, rem = divmod(cfg.trials_per_point, size)
    return [size] * full + ([rem] if rem else [])


def run_sweep(cfg: SimConfig) -> list[SerRecord]:
    """One SerRecord per SNR point, deterministic for a given (config, seed).

    A point stops early once ``early_stop_errors`` symbol errors have been
    collected; the trial count in its record reflects the chunks actually
    aggregated.  With ``workers > 1`` chunks run in processes but are still
    consumed in order, so results match the single-worker run exactly.
    """
    denom = decisions_per_trial(cfg)
    plan = _chunk_plan(cfg)
    records = []
    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for p, snr in enumerate(cfg.snr_points):
            start = time.perf_counter()
            errors = 0
            trials = 0
            if executor is None:
                for c, size in enumerate(plan):
                    errors += _chunk_errors(cfg, snr, p, c, size)
                    trials += size
                    if errors >= cfg.early_stop_errors:
                        break
            else:
                futures = [executor.submit(_chunk_errors, cfg, snr, p, c, size)
                           for c, size in enumerate(plan)]
                for c, fut in enumerate(futures):
                    errors += fut.result()
                    trials += plan[c]
                    if errors >= cfg.early_stop_errors:
                        for rest in futures[c + 1:]:
                            rest.cancel()
                        break
            records.append(SerRecord(
                snr_db=snr,
                trials=trials,
                symbol_errors=errors,
                ser=errors / (trials * denom),
                wall_time=time.perf_counter() - start,
            ))
    finally:
        if executor is not None:
            executor.shutdown(cancel_futures=True)
    return records


CSV_HEADER = ("snr_db", "trials", "errors", "ser", "seed")


def emit_csv(records: list[SerRecord], path, seed: int) -> None:
    if not records:
        raise ValueError("no records to emit")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([repr(r.snr_db), r.trials, r.symbol_errors, repr(r.ser), seed])


def read_csv(path) -> tuple[list[SerRecord], int]:
    """Inverse of emit_csv (wall_time is not persisted and reads back as 0)."""
    records = []
    seed = 0
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for row in reader:
            records.append(SerRecord(
                snr_db=float(row[0]),
                trials=int(row[1]),
                symbol_errors=int(row[2]),
                ser=float(row[3]),
            ))
            seed = int(row[4])
    return records, seed


def emit_plot_data(records: list[SerRecord], path) -> None:
    """Two whitespace-separated columns (snr_db, ser), one line per point."""
    if not records:
        raise ValueError("no records to emit")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# snr_db ser\n")
        for r in records:
            fh.write(f"{r.snr_db!r} {r.ser!r}\n")
