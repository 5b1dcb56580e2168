"""Received-signal models, noise/fading samplers, and the Eb/N0 convention.

All simulations normalize the per-bit energy to 1, so a target Eb/N0 of
x dB maps to a noise spectral density N0 = 10^(-x/10).  Fading gains are
i.i.d. circularly-symmetric complex Gaussians with unit mean-square
(Rayleigh envelope), redrawn per transmitted block, with perfect CSI at
the detector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelRealization",
    "n0_from_ebn0",
    "sample_awgn",
    "sample_rayleigh",
    "receive_downlink",
    "receive_uplink",
    "downlink_gain_matrix",
    "uplink_gain_matrix",
]


def n0_from_ebn0(ebn0_db: float) -> float:
    """Noise spectral density for a given Eb/N0 in dB, with Eb normalized to 1."""
    if not np.isfinite(ebn0_db):
        raise ValueError(f"Eb/N0 must be finite, got {ebn0_db}")
    return float(10.0 ** (-ebn0_db / 10.0))


def sample_awgn(n0: float, k: int, rng: np.random.Generator) -> np.ndarray:
    """k i.i.d. CN(0, n0) samples: variance n0 per complex dimension."""
    if n0 <= 0:
        raise ValueError(f"n0 must be positive, got {n0}")
    scale = np.sqrt(n0 / 2.0)
    return rng.normal(scale=scale, size=k) + 1j * rng.normal(scale=scale, size=k)


def sample_rayleigh(k: int, rng: np.random.Generator) -> np.ndarray:
    """k i.i.d. CN(0, 1) gains; the envelope is Rayleigh with E|h|^2 = 1."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return (rng.normal(size=k) + 1j * rng.normal(size=k)) / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of gains, powers and noise level for a transmission block.

    ``gains`` is (K,) for a downlink receiver or (J, K) with one row per
    transmitting user for the uplink.
    """

    gains: np.ndarray
    powers: np.ndarray
    n0: float

    def __post_init__(self):
        if self.n0 <= 0:
            raise ValueError(f"n0 must be positive, got {self.n0}")
        if np.any(np.asarray(self.powers) < 0):
            raise ValueError("powers must be nonnegative")


def _codeword_stack(codewords) -> np.ndarray:
    cws = np.asarray([np.asarray(c, dtype=complex) for c in codewords])
    if cws.ndim != 2:
        raise ValueError("codewords must be equal-length vectors")
    return cws


def receive_downlink(codewords, powers, h, noise) -> np.ndarray:
    """y = diag(h) * sum_j sqrt(P_j) x_j + n at one receiving user."""
    cws = _codeword_stack(codewords)
    p = np.asarray(powers, dtype=float)
    h = np.asarray(h, dtype=complex)
    n = np.asarray(noise, dtype=complex)
    k = cws.shape[1]
    if p.shape != (cws.shape[0],) or h.shape != (k,) or n.shape != (k,):
        raise ValueError(
            f"dimension mismatch: {cws.shape[0]} codewords of length {k}, "
            f"powers {p.shape}, h {h.shape}, noise {n.shape}")
    return h * (np.sqrt(p)[:, None] * cws).sum(axis=0) + n


def receive_uplink(codewords, powers, per_user_gains, noise) -> np.ndarray:
    """y = sum_j sqrt(P_j) diag(h_j) x_j + n at the shared receiver."""
    cws = _codeword_stack(codewords)
    p = np.asarray(powers, dtype=float)
    g = np.asarray(per_user_gains, dtype=complex)
    n = np.asarray(noise, dtype=complex)
    if g.shape != cws.shape or p.shape != (cws.shape[0],) or n.shape != (cws.shape[1],):
        raise ValueError(
            f"dimension mismatch: codewords {cws.shape}, gains {g.shape}, "
            f"powers {p.shape}, noise {n.shape}")
    return (np.sqrt(p)[:, None] * g * cws).sum(axis=0) + n


def downlink_gain_matrix(h, user_count: int) -> np.ndarray:
    """(K, J) effective gain matrix seen by a detector at one receiver."""
    h = np.asarray(h, dtype=complex)
    return np.repeat(h[:, None], user_count, axis=1)


def uplink_gain_matrix(per_user_gains) -> np.ndarray:
    """(K, J) effective gain matrix from per-user (J, K) uplink gains."""
    return np.asarray(per_user_gains, dtype=complex).T.copy()
