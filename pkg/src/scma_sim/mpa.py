"""Probability-domain message passing detection over the SCMA factor graph.

Messages are length-M probability vectors exchanged along graph edges:
U (resource to user) and V (user to resource).  A resource node update is
the sum-product rule: for each hypothesis of the target user's symbol it
sums, over every combination of the interfering users' symbols, a complex
Gaussian likelihood of the received sample times the incoming V beliefs.
A user node update multiplies the U messages arriving from the user's
other resources.  Everything is normalized every half-iteration; the
probability domain is numerically fragile otherwise.

Two implementations live here: a plain single-observation reference path
(`detect` and the step functions it is built from) and a vectorized
`detect_batch` used by the Monte Carlo harness, which computes the exact
same quantities across a batch axis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DetectorConfig",
    "MessageState",
    "DetectionResult",
    "BatchDetectionResult",
    "initialize",
    "resource_update",
    "user_update",
    "compute_posterior",
    "decide",
    "detect",
    "detect_batch",
    "edge_message_terms",
    "format_message_matrix",
]

# Messages are renormalized to sum 1 after every half-iteration; this is not
# configurable because the golden fixtures and the underflow guard assume it.
NORMALIZE_EACH_HALF_ITERATION = True

# A message vector whose sum falls below this is replaced by the uniform
# vector and counted in MessageState.underflow_count.
UNDERFLOW_FLOOR = 1e-300


@dataclass
class DetectorConfig:
    """Stopping rule: at most ``max_iterations`` rounds, or earlier once the
    posterior table changes by less than ``convergence_tol`` in max-abs."""

    max_iterations: int = 10
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.convergence_tol < 0:
            raise ValueError(f"convergence_tol must be >= 0, got {self.convergence_tol}")


@dataclass
class MessageState:
    """Dense (K, J, M) message tables, zero outside graph edges.

    ``u[k-1, j-1]`` is the resource-to-user message U_{k->j};
    ``v[k-1, j-1]`` is the user-to-resource message V_{j->k};
    ``posterior[j-1]`` is user j's per-symbol belief once computed.
    """

    u: np.ndarray
    v: np.ndarray
    posterior: np.ndarray | None = None
    underflow_count: int = 0

    def _normalize(self, vec: np.ndarray) -> np.ndarray:
        s = vec.sum()
        if s < UNDERFLOW_FLOOR:
            self.underflow_count += 1
            return np.full(vec.shape, 1.0 / vec.shape[0])
        return vec / s


def initialize(fg, modulation_order: int) -> MessageState:
    """Uniform user beliefs on every edge; U messages and posterior unset."""
    if modulation_order < 2:
        raise ValueError(f"modulation order must be >= 2, got {modulation_order}")
    k, j, m = fg.resource_count, fg.user_count, modulation_order
    v = np.zeros((k, j, m))
    mask = np.asarray(fg.f_matrix, dtype=bool)
    v[mask] = 1.0 / m
    return MessageState(u=np.zeros((k, j, m)), v=v)


def _effective_gains(gains, resource_count: int, user_count: int) -> np.ndarray:
    """Normalize gains to a (K, J) matrix; a length-K vector is broadcast to
    all users (one downlink receiver), a scalar to everything."""
    g = np.asarray(gains, dtype=complex)
    if g.ndim == 0:
        return np.full((resource_count, user_count), complex(g))
    if g.ndim == 1 and g.shape[0] == resource_count:
        return np.repeat(g[:, None], user_count, axis=1)
    if g.shape == (resource_count, user_count):
        return g
    raise ValueError(
        f"gains must be scalar, ({resource_count},) or "
        f"({resource_count}, {user_count}); got shape {g.shape}")


def _per_resource_n0(n0, resource_count: int) -> np.ndarray:
    """Noise level as a (K,) vector; a scalar applies to every resource."""
    arr = np.asarray(n0, dtype=float)
    if arr.ndim == 0:
        arr = np.full(resource_count, float(arr))
    if arr.shape != (resource_count,):
        raise ValueError(f"n0 must be scalar or ({resource_count},), got shape {arr.shape}")
    if np.any(arr <= 0):
        raise ValueError("n0 must be positive")
    return arr


def edge_message_terms(state: MessageState, fg, cbs, y, gains, powers, n0,
                       resource: int, user: int):
    """Sum-product breakdown for one edge: (unnormalized (M,) message, terms).

    ``terms[(m, combo)]`` is the contribution of one interfering-symbol
    combination to hypothesis m, with ``combo`` ordered by ascending
    interferer user index.  Exposed for trace dumps and regression tests.
    """
    if not fg.is_edge(resource, user):
        raise ValueError(f"({resource}, {user}) is not a graph edge")
    y = np.asarray(y, dtype=complex)
    gmat = _effective_gains(gains, fg.resource_count, fg.user_count)
    amp = _scaled_codewords(cbs, powers)
    n0k = _per_resource_n0(n0, fg.resource_count)[resource - 1]
    k0 = resource - 1
    yk = y[k0]
    others = [j for j in fg.resource_neighbors[k0] if j != user]
    coeff = 1.0 / (np.pi * n0k)
    m_total = cbs.modulation_order
    unnorm = np.zeros(m_total)
    terms = {}
    for m in range(1, m_total + 1):
        target = gmat[k0, user - 1] * amp[user - 1, m - 1, k0]
        for combo in itertools.product(range(1, m_total + 1), repeat=len(others)):
            resid = yk - target
            belief = 1.0
            for jp, mp in zip(others, combo):
                resid -= gmat[k0, jp - 1] * amp[jp - 1, mp - 1, k0]
                belief *= state.v[k0, jp - 1, mp - 1]
            term = coeff * np.exp(-abs(resid) ** 2 / n0k) * belief
            terms[(m, combo)] = term
            unnorm[m - 1] += term
    return unnorm, terms


def _scaled_codewords(cbs, powers) -> np.ndarray:
    """(J, M, K) tensor of sqrt(P_j) * x_{jm}."""
    p = np.asarray(powers, dtype=float)
    if p.ndim == 0:
        p = np.full(cbs.user_count, float(p))
    if p.shape != (cbs.user_count,):
        raise ValueError(f"powers must have shape ({cbs.user_count},), got {p.shape}")
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    return np.sqrt(p)[:, None, None] * cbs.as_array()


def resource_update(state: MessageState, fg, cbs, y, gains, powers, n0) -> MessageState:
    """Sum-product update of every resource-to-user message, normalized.

    ``n0`` may be a scalar or a (K,) vector of per-resource noise levels
    (used when un-modeled interference is folded into the noise term).
    """
    _per_resource_n0(n0, fg.resource_count)
    for k0, users in enumerate(fg.resource_neighbors):
        for j in users:
            unnorm, _ = edge_message_terms(
                state, fg, cbs, y, gains, powers, n0, k0 + 1, j)
            state.u[k0, j - 1] = state._normalize(unnorm)
    return state


def user_update(state: MessageState, fg) -> MessageState:
    """V_{j->k} = product of U arriving from the user's other resources."""
    m = state.u.shape[2]
    for j0, resources in enumerate(fg.user_neighbors):
        for k in resources:
            prod = np.ones(m)
            for kp in resources:
                if kp != k:
                    prod = prod * state.u[kp - 1, j0]
            state.v[k - 1, j0] = state._normalize(prod)
    return state


def compute_posterior(state: MessageState, fg) -> np.ndarray:
    """Per-user belief: product of U over all the user's resources, normalized."""
    j_total, m = state.u.shape[1], state.u.shape[2]
    post = np.ones((j_total, m))
    for j0, resources in enumerate(fg.user_neighbors):
        for k in resources:
            post[j0] = post[j0] * state.u[k - 1, j0]
        post[j0] = state._normalize(post[j0])
    state.posterior = post
    return post


def decide(posterior: np.ndarray) -> np.ndarray:
    """Per-user argmax symbol (1-based); ties go to the smallest index."""
    return np.argmax(posterior, axis=-1) + 1


@dataclass
class DetectionResult:
    symbols: np.ndarray        # (J,) 1-based decisions
    posterior: np.ndarray      # (J, M)
    iterations: int
    converged: bool
    underflow_count: int = 0


def detect(y, gains, powers, cbs, fg, n0, cfg: DetectorConfig | None = None) -> DetectionResult:
    """Full MPA pipeline on one received vector.

    Iterates resource and user updates until the posterior table moves by
    less than the convergence tolerance (max-abs) or the iteration budget
    is exhausted, then decides per-user symbols by posterior argmax.
    """
    cfg = cfg or DetectorConfig()
    state = initialize(fg, cbs.modulation_order)
    prev = np.full((fg.user_count, cbs.modulation_order), 1.0 / cbs.modulation_order)
    iterations = 0
    converged = False
    for _ in range(cfg.max_iterations):
        resource_update(state, fg, cbs, y, gains, powers, n0)
        user_update(state, fg)
        post = compute_posterior(state, fg)
        iterations += 1
        if np.max(np.abs(post - prev)) < cfg.convergence_tol:
            converged = True
            break
        prev = post
    return DetectionResult(
        symbols=decide(state.posterior),
        posterior=state.posterior,
        iterations=iterations,
        converged=converged,
        underflow_count=state.underflow_count,
    )


# ---------------------------------------------------------------------------
# Batched path

@dataclass
class BatchDetectionResult:
    symbols: np.ndarray        # (B, J)
    posterior: np.ndarray      # (B, J, M)
    iterations: np.ndarray     # (B,)
    converged: np.ndarray      # (B,) bool
    underflow_count: int = 0


def _normalize_batch(arr: np.ndarray) -> tuple[np.ndarray, int]:
    """Normalize (..., M) vectors in place; underflowed vectors go uniform."""
    s = arr.sum(axis=-1, keepdims=True)
    bad = s[..., 0] < UNDERFLOW_FLOOR
    n_bad = int(bad.sum())
    if n_bad:
        arr[bad] = 1.0 / arr.shape[-1]
        s = arr.sum(axis=-1, keepdims=True)
    arr /= s
    return arr, n_bad


def _batch_n0(n0, b: int, resource_count: int) -> np.ndarray:
    """Noise level as a (B, K) array from a scalar, (K,), (B,) or (B, K) input."""
    arr = np.asarray(n0, dtype=float)
    if arr.ndim == 0:
        arr = np.full((b, resource_count), float(arr))
    elif arr.shape == (resource_count,):
        arr = np.broadcast_to(arr, (b, resource_count))
    elif arr.shape == (b,):
        arr = np.broadcast_to(arr[:, None], (b, resource_count))
    elif arr.shape != (b, resource_count):
        raise ValueError(f"n0 must broadcast to ({b}, {resource_count}), got {arr.shape}")
    if np.any(arr <= 0):
        raise ValueError("n0 must be positive")
    return arr


def _likelihood_tables(y, gains, amp, fg, n0):
    """Per-resource Gaussian likelihood over all joint symbol combinations.

    Returns a list over resources: entry k has shape (B, M, ..., M) with one
    M-axis per colliding user (ascending user order).  These depend only on
    the observation, so they are computed once per detection.  ``n0`` is
    (B, K), allowing per-entry and per-resource noise levels.
    """
    b = y.shape[0]
    m = amp.shape[1]
    tables = []
    for k0, users in enumerate(fg.resource_neighbors):
        d = len(users)
        acc = np.zeros((b,) + (1,) * d, dtype=complex)
        for t, j in enumerate(users):
            contrib = gains[:, k0, j - 1, None] * amp[j - 1, :, k0]  # (B, M)
            shape = (b,) + (1,) * t + (m,) + (1,) * (d - 1 - t)
            acc = acc + contrib.reshape(shape)
        resid = y[:, k0].reshape((b,) + (1,) * d) - acc
        n0k = n0[:, k0].reshape((b,) + (1,) * d)
        tables.append(np.exp(-(resid.real ** 2 + resid.imag ** 2) / n0k) / (np.pi * n0k))
    return tables


def _collapse(table: np.ndarray, msgs: list[np.ndarray], keep: int) -> np.ndarray:
    """Weight a likelihood table by every message except ``keep`` and sum out
    those axes, leaving (B, M) for the kept user."""
    out = table
    d = len(msgs)
    for t in range(d - 1, -1, -1):
        if t == keep:
            continue
        b = out.shape[0]
        axes_after = out.ndim - 2 - t  # trailing M-axes beyond axis t+1
        shape = (b,) + (1,) * t + (msgs[t].shape[1],) + (1,) * axes_after
        out = (out * msgs[t].reshape(shape)).sum(axis=t + 1)
    return out


def detect_batch(y, gains, powers, cbs, fg, n0,
                 cfg: DetectorConfig | None = None) -> BatchDetectionResult:
    """Vectorized `detect` over a batch: y is (B, K), gains is (B, K, J),
    and n0 is a scalar or anything broadcastable to (B, K).

    Entries stop evolving (their posterior snapshot is kept) once converged;
    the loop ends when all entries have converged or the budget is spent.
    Matches the single-observation path to floating-point accuracy.
    """
    cfg = cfg or DetectorConfig()
    y = np.asarray(y, dtype=complex)
    gains = np.asarray(gains, dtype=complex)
    if y.ndim != 2 or y.shape[1] != fg.resource_count:
        raise ValueError(f"y must be (B, {fg.resource_count}), got {y.shape}")
    b = y.shape[0]
    if gains.shape != (b, fg.resource_count, fg.user_count):
        raise ValueError(
            f"gains must be (B, {fg.resource_count}, {fg.user_count}), got {gains.shape}")
    n0 = _batch_n0(n0, b, fg.resource_count)

    j_total, m = fg.user_count, cbs.modulation_order
    amp = _scaled_codewords(cbs, powers)
    tables = _likelihood_tables(y, gains, amp, fg, n0)

    u = np.zeros((b, fg.resource_count, j_total, m))
    v = np.zeros_like(u)
    for k0, users in enumerate(fg.resource_neighbors):
        for j in users:
            v[:, k0, j - 1] = 1.0 / m

    prev = np.full((b, j_total, m), 1.0 / m)
    final_post = prev.copy()
    converged = np.zeros(b, dtype=bool)
    iterations = np.full(b, cfg.max_iterations)
    underflows = 0

    for it in range(1, cfg.max_iterations + 1):
        for k0, users in enumerate(fg.resource_neighbors):
            msgs = [v[:, k0, j - 1] for j in users]
            for t, j in enumerate(users):
                msg = _collapse(tables[k0], msgs, t)
                msg, n_bad = _normalize_batch(msg)
                underflows += n_bad
                u[:, k0, j - 1] = msg
        post = np.ones((b, j_total, m))
        for j0, resources in enumerate(fg.user_neighbors):
            for k in resources:
                post[:, j0] *= u[:, k - 1, j0]
            if len(resources) == 2:
                k1, k2 = resources
                msg1, n1 = _normalize_batch(u[:, k2 - 1, j0].copy())
                msg2, n2 = _normalize_batch(u[:, k1 - 1, j0].copy())
                underflows += n1 + n2
                v[:, k1 - 1, j0] = msg1
                v[:, k2 - 1, j0] = msg2
            else:
                for k in resources:
                    prod = np.ones((b, m))
                    for kp in resources:
                        if kp != k:
                            prod *= u[:, kp - 1, j0]
                    prod, n_bad = _normalize_batch(prod)
                    underflows += n_bad
                    v[:, k - 1, j0] = prod
        post, n_bad = _normalize_batch(post)
        underflows += n_bad

        delta = np.abs(post - prev).max(axis=(1, 2))
        fresh = (delta < cfg.convergence_tol) & ~converged
        final_post[~converged] = post[~converged]
        iterations[fresh] = it
        converged |= fresh
        if converged.all():
            break
        prev = post

    return BatchDetectionResult(
        symbols=decide(final_post),
        posterior=final_post,
        iterations=iterations,
        converged=converged,
        underflow_count=underflows,
    )


def format_message_matrix(table: np.ndarray, fg, decimals: int = 4) -> str:
    """Render a (K, J, M) message table as the KM x J block matrix layout
    used in debug dumps: K blocks of M rows, one column per user, zeros on
    non-edges, with a blank line between resource blocks."""
    k_total, j_total, m = table.shape
    width = decimals + 4
    blocks = []
    for k0 in range(k_total):
        lines = []
        for mi in range(m):
            cells = []
            for j0 in range(j_total):
                val = table[k0, j0, mi] if fg.f_matrix[k0, j0] else 0.0
                cells.append(f"{val:{width}.{decimals}f}")
            lines.append(" ".join(cells))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)
