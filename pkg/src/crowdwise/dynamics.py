"""French-DeGroot opinion pooling with self-confidence weights.

Each agent ``i`` mixes its own opinion with weight ``z_i`` and the
``P``-weighted average of the others with weight ``1 - z_i``::

    W(z) = (I - diag(z)) P + diag(z)

An agent with ``z_i == 1`` (exact float equality) is stubborn and never
moves. The limit ``H(z) = lim W(z)^t`` is rank one when nobody is stubborn
and an absorption-probability matrix otherwise.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure, StubbornPresent, ValidationError
from .network import InfluenceNetwork

CLAMP_TOL = 1e-12
RESIDUAL_TOL = 1e-9


class Branch(enum.Enum):
    CONSENSUS = "consensus"
    ABSORPTION = "absorption"


@dataclass(frozen=True)
class NoiseModel:
    """State of the world ``theta`` and per-agent measurement variances."""

    sigma2: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        s2 = np.array(self.sigma2, dtype=float)
        if s2.ndim != 1 or not np.all(np.isfinite(s2)) or np.any(s2 <= 0):
            raise ValidationError("sigma2 must be a vector of positive finite variances")
        s2.setflags(write=False)
        object.__setattr__(self, "sigma2", s2)
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def n(self):
        return self.sigma2.shape[0]


@dataclass(frozen=True)
class LimitMatrix:
    H: np.ndarray
    branch: Branch
    stubborn: frozenset


@dataclass(frozen=True)
class OpinionState:
    x: np.ndarray
    t: int = 0


def as_profile(z, n: int | None = None) -> np.ndarray:
    """Validate a self-confidence profile and return it as a float array."""
    z = np.array(z, dtype=float)
    if z.ndim != 1:
        raise ValidationError("self-confidence profile must be a vector")
    if n is not None and z.shape[0] != n:
        raise ValidationError(f"profile has length {z.shape[0]}, expected {n}")
    if not np.all((z >= 0) & (z <= 1)):
        raise ValidationError("self-confidence values must lie in [0, 1]")
    return z


def stubborn_set(z) -> frozenset:
    return frozenset(int(i) for i in np.flatnonzero(np.asarray(z) == 1.0))


def interaction_matrix(net: InfluenceNetwork, z) -> np.ndarray:
    z = as_profile(z, net.n)
    W = (1.0 - z)[:, None] * net.P
    W[np.diag_indices_from(W)] += z
    return W


def step(net: InfluenceNetwork, z, state: OpinionState) -> OpinionState:
    W = interaction_matrix(net, z)
    x = W @ state.x
    # stubborn rows of W are unit vectors up to round-off; pin them exactly
    stub = np.asarray(z) == 1.0
    x[stub] = state.x[stub]
    return OpinionState(x, state.t + 1)


def _consensus_weights(net, z) -> np.ndarray:
    # normalise pi_i / (1 - z_i) directly so gamma(z) is never formed
    w = net.centrality / (1.0 - z)
    return w / w.sum()


def social_power(net: InfluenceNetwork, z) -> np.ndarray:
    """Weight of each initial opinion in the consensus value.

    Only defined when no agent is stubborn.
    """
    z = as_profile(z, net.n)
    if np.any(z == 1.0):
        raise StubbornPresent(f"stubborn agents {sorted(stubborn_set(z))}")
    return _consensus_weights(net, z)


def limit_matrix(net: InfluenceNetwork, z) -> LimitMatrix:
    """Exact ``lim W(z)^t``.

    Without stubborn agents every row equals :func:`social_power`. Otherwise
    the regular block solves ``(I - Q) X = B`` with ``Q = W[R, R]`` and
    ``B = W[R, S]`` (dense LU with partial pivoting), ``S`` the stubborn
    agents and ``R`` the rest; stubborn rows are unit vectors.

    Raises
    ------
    SolverFailure
        when the solve breaks down or ``||W H - H||_inf > 1e-9``, which in
        practice means some regular ``z_i`` sits within round-off of 1.
    """
    z = as_profile(z, net.n)
    n = net.n
    W = interaction_matrix(net, z)
    S = stubborn_set(z)
    if not S:
        p = _consensus_weights(net, z)
        H = np.tile(p, (n, 1))
        drift = np.max(np.abs(p @ W - p))
        if not np.all(np.isfinite(p)) or drift > RESIDUAL_TOL:
            raise SolverFailure(f"consensus weights are not invariant (drift {drift:.3g})")
        return LimitMatrix(H, Branch.CONSENSUS, S)

    s_idx = np.array(sorted(S))
    r_idx = np.array([i for i in range(n) if i not in S], dtype=int)
    H = np.zeros((n, n))
    H[s_idx, s_idx] = 1.0
    if r_idx.size:
        Q = W[np.ix_(r_idx, r_idx)]
        B = W[np.ix_(r_idx, s_idx)]
        try:
            X = np.linalg.solve(np.eye(r_idx.size) - Q, B)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(f"absorption solve failed: {exc}") from exc
        if not np.all(np.isfinite(X)) or np.min(X) < -CLAMP_TOL:
            raise SolverFailure("absorption probabilities are not a valid distribution")
        X = np.clip(X, 0.0, None)
        X /= X.sum(axis=1, keepdims=True)
        H[np.ix_(r_idx, s_idx)] = X
    residual = np.max(np.abs(W @ H - H))
    if residual > RESIDUAL_TOL:
        raise SolverFailure(f"limit matrix residual {residual:.3g} exceeds {RESIDUAL_TOL}")
    return LimitMatrix(H, Branch.ABSORPTION, S)


def estimation_variances(net: InfluenceNetwork, z, noise: NoiseModel) -> np.ndarray:
    """Variance of each agent's asymptotic estimate, ``sum_j H_ij^2 sigma_j^2``."""
    H = limit_matrix(net, z).H
    return (H * H) @ noise.sigma2


def common_cost(net: InfluenceNetwork, z, noise: NoiseModel) -> float:
    """Shared asymptotic variance ``B(z) / A(z)^2`` when nobody is stubborn."""
    z = as_profile(z, net.n)
    if np.any(z == 1.0):
        raise StubbornPresent(f"stubborn agents {sorted(stubborn_set(z))}")
    y = 1.0 / (1.0 - z)
    # scaling y by its max leaves B/A^2 unchanged and keeps squares finite
    y = y / y.max()
    pi = net.centrality
    A = np.sum(pi * y)
    B = np.sum((pi * y) ** 2 * noise.sigma2)
    return float(B / A**2)


def draw_noise(rng: np.random.Generator, sigma2, size=None, distribution="gaussian"):
    """Zero-mean independent noise with the given per-agent variances.

    ``distribution="uniform"`` uses ``U(-a, a)`` with ``a = sqrt(3 sigma2)``.
    """
    sd = np.sqrt(np.asarray(sigma2))
    shape = sd.shape if size is None else (size,) + sd.shape
    if distribution == "gaussian":
        return rng.standard_normal(shape) * sd
    if distribution == "uniform":
        half = np.sqrt(3.0) * sd
        return rng.uniform(-1.0, 1.0, shape) * half
    raise ValueError(f"unknown noise distribution {distribution!r}")


def simulate_opinions(net, z, noise: NoiseModel, seed, t_max: int, distribution="gaussian"):
    """One noisy realisation of the opinion dynamics.

    Returns an array of shape ``(t_max + 1, n)`` whose row ``t`` is ``x(t)``.
    """
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    z = as_profile(z, net.n)
    rng = np.random.default_rng(seed)
    state = OpinionState(noise.theta + draw_noise(rng, noise.sigma2, distribution=distribution))
    out = np.empty((t_max + 1, net.n))
    out[0] = state.x
    for t in range(1, t_max + 1):
        state = step(net, z, state)
        out[t] = state.x
    return out


def final_opinion_samples(net, z, noise: NoiseModel, seed, t_max: int, replicates: int,
                          distribution="gaussian"):
    """``x(t_max)`` for ``replicates`` independent noise draws, shape ``(replicates, n)``.

    All replicates come from one generator seeded with ``seed``, drawn as a
    single ``(replicates, n)`` block.
    """
    z = as_profile(z, net.n)
    rng = np.random.default_rng(seed)
    X = noise.theta + draw_noise(rng, noise.sigma2, size=replicates, distribution=distribution)
    Wt = interaction_matrix(net, z).T
    for _ in range(t_max):
        X = X @ Wt
    return X
