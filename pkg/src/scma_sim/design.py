"""Codebook construction tools: rotated PAM constellations, sum alphabets,
mutual-information metrics, shaping gain, and assembly onto a resource grid.

The design recipe implemented here builds one mother PAM constellation,
derives the interfering users' constellations by rotation, scores a
candidate angle pair by a closed-form lower bound on the mutual information
between one resource's received sample and the superposed symbol, and then
distributes the constellation triple over the resources according to an
indicator grid.  Mutual information is reported in bits throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.special import logsumexp

from scma_sim.codebook import Codebook, CodebookSet

__all__ = [
    "UserConstellation",
    "SumAlphabet",
    "IndicatorMatrix",
    "MiEstimate",
    "RotationSearch",
    "pam_mother",
    "rotate",
    "sum_alphabet",
    "mi_lower_bound",
    "mi_exact_estimate",
    "optimize_rotation_angles",
    "shaping_gain",
    "assemble_codebooks",
    "bundled_constellations",
    "bundled_indicator",
]

_LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class UserConstellation:
    """M complex points for one user position in the collision pattern."""

    points: np.ndarray
    label: int = 1

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


@dataclass(frozen=True, eq=False)
class SumAlphabet:
    """All M^d_f superposed values seen on one resource from d_f users."""

    values: np.ndarray
    df: int

    @property
    def size(self) -> int:
        return self.values.shape[0]


class MiEstimate(NamedTuple):
    value: float      # bits
    stderr: float     # bits
    samples: int


class RotationSearch(NamedTuple):
    theta2_deg: float
    theta3_deg: float
    objective: float  # lower-bound MI in bits at the optimum


def pam_mother(m: int, unit_energy: bool = False) -> UserConstellation:
    """M equally spaced real points, symmetric about 0, outermost at +/-1.

    With ``unit_energy`` the points are scaled so their average energy is 1.
    """
    if m < 2 or m % 2:
        raise ValueError(f"modulation order must be even and >= 2, got {m}")
    pts = (-1.0 + 2.0 * np.arange(m) / (m - 1)).astype(complex)
    if unit_energy:
        pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    return UserConstellation(points=pts, label=1)


def rotate(c: UserConstellation, theta: float) -> UserConstellation:
    """Rotate every point by ``theta`` radians; energies are preserved."""
    return UserConstellation(points=c.points * np.exp(1j * theta), label=c.label)


def sum_alphabet(constellations) -> SumAlphabet:
    """Componentwise sums over every symbol combination of d_f users.

    Enumeration is lexicographic in the symbol tuple: the last user's
    symbol varies fastest, so entry i corresponds to the mixed-radix
    digits of i.
    """
    cs = list(constellations)
    m = cs[0].size
    if any(c.size != m for c in cs):
        raise ValueError("constellations must share the modulation order")
    values = np.zeros(1, dtype=complex)
    for c in cs:
        values = (values[:, None] + c.points[None, :]).ravel()
    return SumAlphabet(values=values, df=len(cs))


def mi_lower_bound(s: SumAlphabet, n0: float) -> float:
    """Closed-form lower bound, in bits, on I(Y; S) for Y = S + CN(0, n0):

        log2 |S| - log2[1 + (1/|S|) sum_{j != i} exp(-||s_j - s_i||^2 / (4 n0))]
    """
    if n0 <= 0:
        raise ValueError(f"n0 must be positive, got {n0}")
    v = s.values
    d2 = np.abs(v[:, None] - v[None, :]) ** 2
    pair_sum = float(np.exp(-d2 / (4.0 * n0)).sum()) - v.shape[0]  # drop diagonal
    return float(np.log2(v.shape[0]) - np.log2(1.0 + pair_sum / v.shape[0]))


def mi_exact_estimate(s: SumAlphabet, n0: float, samples: int,
                      rng: np.random.Generator) -> MiEstimate:
    """Monte Carlo estimate of I(Y; S) in bits, with its standard error.

    Draws the transmitted sum uniformly, adds CN(0, n0) noise, and averages
    the log-sum of likelihood ratios; this is the standard exact expression
    for a discrete uniform input on a complex AWGN channel.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if n0 <= 0:
        raise ValueError(f"n0 must be positive, got {n0}")
    v = s.values
    size = v.shape[0]
    if size == 1:
        return MiEstimate(0.0, 0.0, samples)
    idx = rng.integers(0, size, size=samples)
    noise = (rng.normal(size=samples) + 1j * rng.normal(size=samples)) * np.sqrt(n0 / 2.0)
    y = v[idx] + noise
    # integrand = log2 sum_i exp((||y - s_j||^2 - ||y - s_i||^2) / n0)
    d2 = np.abs(y[:, None] - v[None, :]) ** 2
    arg = (d2[np.arange(samples), idx][:, None] - d2) / n0
    integrand = logsumexp(arg, axis=1) / _LN2
    value = float(np.log2(size) - integrand.mean())
    stderr = float(integrand.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("inf")
    return MiEstimate(value, stderr, samples)


def _difference_profile(points: np.ndarray):
    """Distinct pairwise differences of a constellation with multiplicities."""
    diffs = (points[:, None] - points[None, :]).ravel()
    rounded = np.round(diffs, 12)
    vals, counts = np.unique(rounded, return_counts=True)
    return vals, counts.astype(float)


def optimize_rotation_angles(u1: UserConstellation, n0: float,
                             grid_step_deg: float = 1.0) -> RotationSearch:
    """Exhaustive grid search for the two interferer rotation angles.

    Maximizes the lower-bound MI of the three-user sum alphabet
    {u1, u1 e^(j theta2), u1 e^(j theta3)} over a [0, 360) x [0, 360) grid.
    The pair sum over the M^3 x M^3 alphabet is regrouped by pairwise
    difference values of u1 (an exact algebraic identity), which keeps the
    full-resolution search cheap.  Near-ties (relative 1e-12) are broken
    toward the lexicographically smallest angle pair, so the result does
    not depend on enumeration order.
    """
    if n0 <= 0:
        raise ValueError(f"n0 must be positive, got {n0}")
    steps = 360.0 / grid_step_deg
    if abs(steps - round(steps)) > 1e-9:
        raise ValueError(f"grid step must divide 360, got {grid_step_deg}")
    n_steps = int(round(steps))
    angles = np.arange(n_steps) * grid_step_deg

    vals, counts = _difference_profile(u1.points)
    a, b, c = np.meshgrid(vals, vals, vals, indexing="ij")
    w = (counts[:, None, None] * counts[None, :, None] * counts[None, None, :]).ravel()
    a, b, c = a.ravel(), b.ravel(), c.ravel()

    phases = np.exp(1j * np.deg2rad(angles))
    size = u1.size ** 3
    # T[i2, i3] = sum over difference triples of w * exp(-|a + b p2 + c p3|^2 / 4 n0);
    # the all-zero triple contributes exactly the |S| diagonal terms, so
    # I = log2 |S| - log2(T / |S|) and minimizing T maximizes I.
    t = np.empty((n_steps, n_steps))
    scale = -1.0 / (4.0 * n0)
    bp = b[:, None] * phases[None, :]            # (C, n2)
    cp = c[:, None] * phases[None, :]            # (C, n3)
    chunk = max(1, int(2e6) // (a.shape[0] * n_steps) + 1)
    for start in range(0, n_steps, chunk):
        stop = min(start + chunk, n_steps)
        d = a[:, None, None] + bp[:, start:stop, None] + cp[:, None, :]
        t[start:stop] = np.einsum(
            "c,cij->ij", w, np.exp(scale * (d.real ** 2 + d.imag ** 2)))

    tmin = t.min()
    cand = np.argwhere(t <= tmin * (1.0 + 1e-12))
    i2, i3 = min(map(tuple, cand))
    objective = float(2.0 * np.log2(size) - np.log2(t[i2, i3]))
    return RotationSearch(float(angles[i2]), float(angles[i3]), objective)


def shaping_gain(points, n: int = 2) -> float:
    """V(R)^(2/n) / (6 E_av) with V(R) the convex-hull area of the points.

    Only the two-dimensional case (points in the complex plane) is
    supported; fewer than 3 distinct non-collinear points raise ValueError.
    """
    if n != 2:
        raise ValueError(f"only n=2 (planar constellations) is supported, got n={n}")
    pts = np.asarray(points, dtype=complex).ravel()
    xy = np.unique(np.column_stack([pts.real, pts.imag]), axis=0)
    if xy.shape[0] < 3:
        raise ValueError("degenerate hull: need at least 3 distinct points")
    try:
        hull = ConvexHull(xy)
    except QhullError as exc:
        raise ValueError("degenerate hull: points are collinear") from exc
    area = hull.volume  # for 2-D inputs ConvexHull.volume is the area
    e_av = float(np.mean(np.abs(pts) ** 2))
    return float(area ** (2.0 / n) / (6.0 * e_av))


@dataclass(frozen=True, eq=False)
class IndicatorMatrix:
    """K x J grid naming which constellation each user places on each resource.

    ``labels[k, j]`` is 0 for an empty cell or a 1-based constellation label.
    ``cell_orders`` optionally reorders the M points within a cell (keyed by
    1-based (row, column), value a permutation of 1..M); cells default to
    the constellation's natural point order.
    """

    labels: np.ndarray
    cell_orders: dict = field(default_factory=dict)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValueError(f"labels must be 2-D, got shape {lab.shape}")
        per_column = (lab > 0).sum(axis=0)
        if per_column.min() != per_column.max():
            raise ValueError("every column must occupy the same number of rows")

    @property
    def resource_count(self) -> int:
        return self.labels.shape[0]

    @property
    def user_count(self) -> int:
        return self.labels.shape[1]

    def factor_matrix(self) -> np.ndarray:
        return (np.asarray(self.labels) > 0).astype(np.int8)


def assemble_codebooks(constellations, indicator: IndicatorMatrix) -> CodebookSet:
    """Build the full codebook set from labeled constellations and a grid.

    User j's codebook gets, at each occupied row k, the M points of the
    constellation named by the cell (in the cell's point order); all other
    rows are zero.
    """
    by_label = {c.label: c for c in constellations}
    m = next(iter(by_label.values())).size
    if any(c.size != m for c in by_label.values()):
        raise ValueError("constellations must share the modulation order")
    labels = np.asarray(indicator.labels)
    books = []
    for j in range(indicator.user_count):
        entries = np.zeros((indicator.resource_count, m), dtype=complex)
        rows = []
        for k in range(indicator.resource_count):
            lab = int(labels[k, j])
            if lab == 0:
                continue
            if lab not in by_label:
                raise ValueError(f"cell ({k + 1}, {j + 1}) names unknown label {lab}")
            order = indicator.cell_orders.get((k + 1, j + 1))
            pts = by_label[lab].points
            if order is not None:
                if sorted(order) != list(range(1, m + 1)):
                    raise ValueError(
                        f"cell order for ({k + 1}, {j + 1}) is not a permutation of 1..{m}")
                pts = pts[np.asarray(order) - 1]
            entries[k] = pts
            rows.append(k + 1)
        entries.flags.writeable = False
        books.append(Codebook(user_id=j + 1, entries=entries, nonzero_rows=tuple(rows)))
    return CodebookSet(codebooks=tuple(books))


def bundled_constellations() -> tuple[UserConstellation, UserConstellation, UserConstellation]:
    """The designed constellation triple behind the bundled table1 codebooks.

    The second and third constellations are shipped as fixed values: they
    come from rotating the mother PAM set and then applying a hand-tuned
    irregularity adjustment, and only the final points are authoritative.
    """
    u1 = UserConstellation(np.array([-1.0, -0.333, 0.333, 1.0], dtype=complex), label=1)
    u2 = UserConstellation(np.array(
        [-0.1109 - 0.3j, 0.6 + 1.0j, -0.6 - 1.0j, 0.1109 + 0.3j]), label=2)
    u3 = UserConstellation(np.array(
        [0.3 - 0.3j, -0.6 + 1.0j, 0.6 - 1.0j, -0.3 + 0.3j]), label=3)
    return u1, u2, u3


def bundled_indicator() -> IndicatorMatrix:
    """Resource grid of the bundled 6x4 design.

    The two label-2 cells that share a codebook with label 3 list their
    points sorted by real part; this balances the per-codeword energies
    (large points of one constellation pair with small points of the other)
    and matches what the bundled table1/table2 files contain.
    """
    labels = np.array([
        [1, 0, 2, 0, 3, 0],
        [0, 2, 3, 0, 0, 1],
        [2, 0, 0, 1, 0, 3],
        [0, 1, 0, 3, 2, 0],
    ])
    orders = {(1, 3): (3, 1, 4, 2), (4, 5): (3, 1, 4, 2)}
    return IndicatorMatrix(labels=labels, cell_orders=orders)
