"""Hybrid multiple access: two SCMA groups superposed in the power domain.

A strong (near) group and a weak (far) group share the K resources.  The
weak group carries most of the transmit power, so a strong user's receiver
first detects the weak group, re-encodes and subtracts it (successive
interference cancellation), and only then detects its own group.  Weak
users detect their group directly, treating the low-power strong signal
as extra noise.

Per-receiver channels follow the downlink model: the whole superposition
passes through the receiving user's own gain vector.  The cancellation
therefore subtracts through the receiver's own gains by default; passing
``subtract_with_weak_gains=True`` instead applies each weak user's own
gain vector inside the subtraction, which mirrors a common textbook
formula but is not self-consistent with the downlink model.

Wherever the weak group is detected with the strong group still present,
the detector's noise level is inflated per resource by the known average
strong-group power through the receiver's gains; that is what "treating
the strong signal as noise" means for a receiver that knows the power
split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scma_sim.codebook import CodebookSet, superpose
from scma_sim.factor_graph import FactorGraph, from_codebook_set
from scma_sim.mpa import DetectorConfig, detect, detect_batch

__all__ = [
    "HmaConfig",
    "HmaRunConfig",
    "default_hma_config",
    "hma_superpose",
    "sic_detect_strong",
    "genie_sic_detect_strong",
    "detect_weak",
    "hma_overloading",
    "detect_strong_batch",
    "detect_weak_batch",
    "pd_noma_pair_errors",
]


@dataclass(eq=False)
class HmaConfig:
    """Two codebook groups sharing K resources plus their power split.

    The weak group must hold more total power than the strong group; that
    ordering is what makes the weak signal decodable (and cancelable) first.
    """

    group1: CodebookSet        # strong / near users
    group2: CodebookSet        # weak / far users
    strong_powers: np.ndarray  # (J1,)
    weak_powers: np.ndarray    # (J2,)
    fg1: FactorGraph = field(init=False)
    fg2: FactorGraph = field(init=False)

    def __post_init__(self):
        self.strong_powers = np.asarray(self.strong_powers, dtype=float)
        self.weak_powers = np.asarray(self.weak_powers, dtype=float)
        if self.group1.resource_count != self.group2.resource_count:
            raise ValueError("groups must share the resource count")
        if self.strong_powers.shape != (self.group1.user_count,):
            raise ValueError("strong_powers must have one entry per strong user")
        if self.weak_powers.shape != (self.group2.user_count,):
            raise ValueError("weak_powers must have one entry per weak user")
        if np.any(self.strong_powers < 0) or np.any(self.weak_powers < 0):
            raise ValueError("powers must be nonnegative")
        # an all-zero weak group is allowed as a degenerate test configuration
        if 0 < self.weak_powers.sum() <= self.strong_powers.sum():
            raise ValueError("the weak group must get more total power than the strong group")
        self.fg1 = from_codebook_set(self.group1)
        self.fg2 = from_codebook_set(self.group2)

    @property
    def j1(self) -> int:
        return self.group1.user_count

    @property
    def j2(self) -> int:
        return self.group2.user_count

    @property
    def resource_count(self) -> int:
        return self.group1.resource_count

    def strong_interference(self) -> np.ndarray:
        """(K,) average strong-group power per resource at unit channel gain."""
        return interference_power(self.group1, self.strong_powers)


def interference_power(group: CodebookSet, powers) -> np.ndarray:
    """(K,) per-resource average power of a power-scaled codebook group."""
    out = np.zeros(group.resource_count)
    for i, cb in enumerate(group.codebooks):
        out += powers[i] * np.mean(np.abs(cb.entries) ** 2, axis=1)
    return out


def _inflated_n0(n0: float, h: np.ndarray, interference: np.ndarray) -> np.ndarray:
    """Effective per-resource noise with un-modeled interference folded in."""
    return n0 + (np.abs(h) ** 2) * interference


@dataclass
class HmaRunConfig:
    """Monte Carlo knobs for hybrid sweeps: group sizes, power split, and the
    amplitude factor modeling the far users' extra path loss."""

    j1: int = 6
    j2: int = 6
    strong_power_total: float = 0.2
    weak_power_total: float = 0.8
    weak_gain_factor: float = 0.5
    subtract_with_weak_gains: bool = False


def default_hma_config(run: HmaRunConfig | None = None) -> HmaConfig:
    """HmaConfig with both groups on bundled codebooks (6x4 by default)."""
    from scma_sim.systems import builtin_codebook_set

    run = run or HmaRunConfig()
    sizes = {6: "6x4", 8: "8x4"}
    if run.j1 not in sizes or run.j2 not in sizes:
        raise ValueError(f"group sizes must be in {sorted(sizes)}, got {run.j1}, {run.j2}")
    return HmaConfig(
        group1=builtin_codebook_set(sizes[run.j1]),
        group2=builtin_codebook_set(sizes[run.j2]),
        strong_powers=np.full(run.j1, run.strong_power_total / run.j1),
        weak_powers=np.full(run.j2, run.weak_power_total / run.j2),
    )


def hma_superpose(strong_codewords, weak_codewords, cfg: HmaConfig) -> np.ndarray:
    """x = sum_i sqrt(Ps_i) xs_i + sum_j sqrt(Pw_j) xw_j."""
    if len(strong_codewords) != cfg.j1:
        raise ValueError(f"expected {cfg.j1} strong codewords, got {len(strong_codewords)}")
    if len(weak_codewords) != cfg.j2:
        raise ValueError(f"expected {cfg.j2} weak codewords, got {len(weak_codewords)}")
    return (superpose(strong_codewords, cfg.strong_powers)
            + superpose(weak_codewords, cfg.weak_powers))


def _recreate_weak(cfg: HmaConfig, weak_symbols) -> np.ndarray:
    """(J2, K) re-encoded weak codewords from 1-based symbol decisions."""
    xw = cfg.group2.as_array()  # (J2, M, K)
    idx = np.asarray(weak_symbols) - 1
    return xw[np.arange(cfg.j2), idx]


def sic_detect_strong(y, user: int, cfg: HmaConfig, h, n0: float,
                      det_cfg: DetectorConfig | None = None,
                      subtract_with_weak_gains: bool = False,
                      weak_gains=None) -> int:
    """SIC pipeline at strong user ``user``: detect the weak group, re-encode
    and subtract it, detect the strong group, keep only this user's symbol.

    ``h`` is the receiver's own length-K gain vector.  With
    ``subtract_with_weak_gains`` the cancellation uses ``weak_gains``
    (a (J2, K) array of the weak users' own vectors) instead of ``h``.
    """
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    n0_weak = _inflated_n0(n0, h, cfg.strong_interference())
    weak = detect(y, h, cfg.weak_powers, cfg.group2, cfg.fg2, n0_weak, det_cfg)
    xw_hat = _recreate_weak(cfg, weak.symbols)
    if subtract_with_weak_gains:
        if weak_gains is None:
            raise ValueError("weak_gains is required with subtract_with_weak_gains")
        sub_gains = np.asarray(weak_gains, dtype=complex)
    else:
        sub_gains = np.broadcast_to(h, (cfg.j2, h.shape[0]))
    y_sic = y - (np.sqrt(cfg.weak_powers)[:, None] * sub_gains * xw_hat).sum(axis=0)
    strong = detect(y_sic, h, cfg.strong_powers, cfg.group1, cfg.fg1, n0, det_cfg)
    return int(strong.symbols[user - 1])


def genie_sic_detect_strong(y, user: int, cfg: HmaConfig, h, n0: float,
                            true_weak_symbols,
                            det_cfg: DetectorConfig | None = None) -> int:
    """SIC with the true weak codewords subtracted; an upper-bound receiver."""
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    xw = _recreate_weak(cfg, true_weak_symbols)
    y_sic = y - h * (np.sqrt(cfg.weak_powers)[:, None] * xw).sum(axis=0)
    strong = detect(y_sic, h, cfg.strong_powers, cfg.group1, cfg.fg1, n0, det_cfg)
    return int(strong.symbols[user - 1])


def detect_weak(y, user: int, cfg: HmaConfig, h, n0: float,
                det_cfg: DetectorConfig | None = None) -> int:
    """Weak user detection: plain MPA on the weak group, with the strong
    group's known power folded into the noise level; returns this user's
    symbol."""
    h = np.asarray(h, dtype=complex)
    n0_weak = _inflated_n0(n0, h, cfg.strong_interference())
    res = detect(np.asarray(y, dtype=complex), h,
                 cfg.weak_powers, cfg.group2, cfg.fg2, n0_weak, det_cfg)
    return int(res.symbols[user - 1])


def hma_overloading(j1: int, j2: int, k: int) -> float:
    """Combined users per resource as a percentage, 100 * (J1 + J2) / K."""
    if k < 1 or j1 < 0 or j2 < 0:
        raise ValueError(f"invalid sizes J1={j1}, J2={j2}, K={k}")
    return 100.0 * (j1 + j2) / k


# ---------------------------------------------------------------------------
# Batched paths used by the Monte Carlo harness

def _broadcast_gains(h: np.ndarray, user_count: int) -> np.ndarray:
    """(B, K) receiver gains to the (B, K, J) layout the detector expects."""
    return np.repeat(h[:, :, None], user_count, axis=2)


def detect_weak_batch(y, h, cfg: HmaConfig, n0: float,
                      det_cfg: DetectorConfig | None = None) -> np.ndarray:
    """(B, J2) weak-group decisions for a batch of receivers, with the
    strong group's power folded into the per-resource noise level."""
    h = np.asarray(h)
    n0_weak = _inflated_n0(n0, h, cfg.strong_interference()[None, :])
    res = detect_batch(y, _broadcast_gains(h, cfg.j2),
                       cfg.weak_powers, cfg.group2, cfg.fg2, n0_weak, det_cfg)
    return res.symbols


def detect_strong_batch(y, h, cfg: HmaConfig, n0: float,
                        det_cfg: DetectorConfig | None = None,
                        subtract_with_weak_gains: bool = False,
                        weak_gains=None,
                        genie_weak_symbols=None):
    """Batched SIC at strong receivers: returns (strong (B, J1), weak (B, J2)).

    ``genie_weak_symbols`` short-circuits the weak detection stage with the
    true symbols (genie-aided bound).  Every strong user's decision is
    returned; callers keep the entry matching each receiver.
    """
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if genie_weak_symbols is not None:
        weak_symbols = np.asarray(genie_weak_symbols)
    else:
        weak_symbols = detect_weak_batch(y, h, cfg, n0, det_cfg)
    xw = cfg.group2.as_array()  # (J2, M, K)
    xw_hat = xw[np.arange(cfg.j2)[None, :], weak_symbols - 1]  # (B, J2, K)
    if subtract_with_weak_gains:
        if weak_gains is None:
            raise ValueError("weak_gains is required with subtract_with_weak_gains")
        sub_gains = np.asarray(weak_gains, dtype=complex)  # (B, J2, K)
    else:
        sub_gains = h[:, None, :]
    y_sic = y - (np.sqrt(cfg.weak_powers)[None, :, None] * sub_gains * xw_hat).sum(axis=1)
    res = detect_batch(y_sic, _broadcast_gains(h, cfg.j1),
                       cfg.strong_powers, cfg.group1, cfg.fg1, n0, det_cfg)
    return res.symbols, weak_symbols


# ---------------------------------------------------------------------------
# Power-domain NOMA baseline: K independent two-user pairs with SIC.

_QPSK = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2.0)


def pd_noma_pair_errors(rng: np.random.Generator, n0: float, trials: int,
                        strong_power: float = 0.2, weak_power: float = 0.8,
                        weak_gain_factor: float = 0.5,
                        rayleigh: bool = True) -> np.ndarray:
    """(trials, 2) error indicators for one two-user power-domain pair.

    The strong user detects and cancels the weak user's QPSK symbol before
    detecting its own; the weak user decodes directly.  This is a baseline
    construction, not part of the SCMA pipeline.
    """
    if weak_power <= strong_power:
        raise ValueError("weak user must get more power than the strong user")
    s_idx = rng.integers(0, 4, size=trials)
    w_idx = rng.integers(0, 4, size=trials)
    if rayleigh:
        h_s = (rng.normal(size=trials) + 1j * rng.normal(size=trials)) / np.sqrt(2.0)
        h_w = (rng.normal(size=trials) + 1j * rng.normal(size=trials)) / np.sqrt(2.0)
    else:
        h_s = np.ones(trials, dtype=complex)
        h_w = np.ones(trials, dtype=complex)
    h_w = h_w * weak_gain_factor
    scale = np.sqrt(n0 / 2.0)
    n_s = rng.normal(scale=scale, size=trials) + 1j * rng.normal(scale=scale, size=trials)
    n_w = rng.normal(scale=scale, size=trials) + 1j * rng.normal(scale=scale, size=trials)

    x = np.sqrt(strong_power) * _QPSK[s_idx] + np.sqrt(weak_power) * _QPSK[w_idx]
    y_s = h_s * x + n_s
    y_w = h_w * x + n_w

    def nearest(y, h, power):
        d = np.abs(y[:, None] - np.sqrt(power) * h[:, None] * _QPSK[None, :])
        return d.argmin(axis=1)

    w_hat_at_s = nearest(y_s, h_s, weak_power)
    y_sic = y_s - np.sqrt(weak_power) * h_s * _QPSK[w_hat_at_s]
    s_hat = nearest(y_sic, h_s, strong_power)
    w_hat = nearest(y_w, h_w, weak_power)
    return np.column_stack([s_hat != s_idx, w_hat != w_idx])
