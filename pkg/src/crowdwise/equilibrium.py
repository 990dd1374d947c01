"""Best responses, the Pareto segment and Nash classification of profiles.

Agent ``i`` minimises the variance ``v_i(z)`` of its own asymptotic
estimate over ``z_i in [0, 1]``. When nobody else is stubborn the answer is
a single point given in closed form. When someone else is stubborn the
variance does not depend on ``z_i`` below 1, so the best-response set is one
of ``[0, 1)``, ``[0, 1]`` or ``{1}``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    NoiseModel,
    as_profile,
    common_cost,
    estimation_variances,
    stubborn_set,
)
from .errors import StubbornPresent, ValidationError
from .network import InfluenceNetwork, is_directed_ring, reachable_members, restricted_graph

TIE_RTOL = 1e-12
POINT_TOL = 1e-9
ZSTAR_TOL = 1e-9
ALPHA_SLACK = 1e-9


class BRKind(enum.Enum):
    POINT = "point"
    HALF_OPEN_01 = "[0,1)"
    CLOSED_01 = "[0,1]"
    ONE = "{1}"


@dataclass(frozen=True)
class BestResponseSet:
    kind: BRKind
    value: float | None = None

    def __post_init__(self):
        if (self.kind is BRKind.POINT) != (self.value is not None):
            raise ValueError("value is required exactly for POINT responses")
        if self.kind is BRKind.POINT and not 0.0 <= self.value < 1.0:
            raise ValueError(f"point response {self.value!r} outside [0, 1)")

    def contains(self, x: float, tol: float = POINT_TOL) -> bool:
        if self.kind is BRKind.POINT:
            return abs(x - self.value) <= tol
        if self.kind is BRKind.HALF_OPEN_01:
            return 0.0 <= x < 1.0
        if self.kind is BRKind.CLOSED_01:
            return 0.0 <= x <= 1.0
        return x == 1.0

    def sample(self, rng: np.random.Generator) -> float:
        """Uniform draw from the set.

        Interval kinds consume exactly one ``rng.random()`` draw; point
        kinds consume nothing. ``[0, 1]`` is sampled as ``[0, 1)``, which
        differs only on a null set.
        """
        if self.kind is BRKind.POINT:
            return self.value
        if self.kind is BRKind.ONE:
            return 1.0
        return float(rng.random())

    def __str__(self):
        return f"{{{self.value!r}}}" if self.kind is BRKind.POINT else self.kind.value


@dataclass(frozen=True)
class ParetoSegment:
    """Profiles ``1 - alpha * direction`` for ``0 < alpha <= alpha_star``."""

    mu_star: np.ndarray
    v_min: float
    alpha_star: float
    direction: np.ndarray

    def profile(self, alpha: float) -> np.ndarray:
        if not 0.0 < alpha <= self.alpha_star * (1 + 1e-12):
            raise ValueError(f"alpha={alpha!r} outside (0, {self.alpha_star!r}]")
        return np.clip(1.0 - alpha * self.direction, 0.0, 1.0)


class Verdict(enum.Enum):
    STRICT_NASH_INTERIOR = "StrictNashInterior"
    NON_STRICT_BOUNDARY_CERTIFIED = "NonStrictBoundaryCertified"
    NASH_NUMERIC_ONLY = "NashNumericOnly"
    NOT_NASH = "NotNash"


@dataclass
class NashReport:
    verdict: Verdict
    alpha_hat: float | None = None
    certificate: list[tuple[str, bool]] = field(default_factory=list)
    max_deviation_gain: float | None = None
    # (agent, self-confidence) achieving max_deviation_gain
    deviation: tuple[int, float] | None = None

    def as_dict(self):
        return {
            "verdict": self.verdict.value,
            "alpha_hat": self.alpha_hat,
            "certificate": [{"condition": c, "passed": ok} for c, ok in self.certificate],
            "max_deviation_gain": self.max_deviation_gain,
            "deviation": None if self.deviation is None
            else {"agent": self.deviation[0], "z": self.deviation[1]},
        }


def aggregates(net: InfluenceNetwork, noise: NoiseModel, z, k: int) -> tuple[float, float]:
    """Sums over ``j != k`` of ``pi_j y_j`` and ``(pi_j y_j)^2 sigma_j^2``, ``y = 1/(1-z)``."""
    z = as_profile(z, net.n)
    mask = np.arange(net.n) != k
    if np.any(z[mask] == 1.0):
        raise StubbornPresent(f"agents other than {k} are stubborn")
    a = net.centrality[mask] / (1.0 - z[mask])
    return float(a.sum()), float(np.sum(a * a * noise.sigma2[mask]))


def point_responses(pi, sigma2, z) -> np.ndarray:
    """Closed-form best response of every agent, assuming ``z < 1`` for all others.

    ``b_i = max(0, 1 - A_i pi_i sigma_i^2 / B_i)``. Entry ``i`` is only
    meaningful when no agent other than ``i`` is stubborn.
    """
    n = len(pi)
    with np.errstate(divide="ignore"):
        a = pi / (1.0 - z)
    off = ~np.eye(n, dtype=bool)
    A = (off * a[None, :]).sum(axis=1)
    B = (off * (a * a * sigma2)[None, :]).sum(axis=1)
    return np.maximum(0.0, 1.0 - A * pi * sigma2 / B)


def certified_response(net: InfluenceNetwork, noise: NoiseModel, z, i: int) -> BestResponseSet | None:
    """Best response decided by graph reachability and exact variance comparison.

    Applies only when some other agent is stubborn. Let ``J`` be the
    stubborn agents reachable from ``i`` through regular agents. If ``J`` is
    a single agent ``j`` then ``i`` inherits ``sigma_j^2`` exactly, and the
    response follows from comparing it with ``sigma_i^2``. If ``|J| >= 2``
    and ``sigma_i^2 >= max_J sigma_j^2`` staying regular is strictly better.
    Returns ``None`` when neither case settles the answer.
    """
    z = as_profile(z, net.n)
    S = stubborn_set(z) - {i}
    if not S:
        return None
    J = reachable_members(net, i, S)
    s2 = noise.sigma2
    if len(J) == 1:
        (j,) = J
        if s2[j] == s2[i]:
            return BestResponseSet(BRKind.CLOSED_01)
        return BestResponseSet(BRKind.HALF_OPEN_01 if s2[j] < s2[i] else BRKind.ONE)
    if s2[i] >= max(s2[j] for j in J):
        return BestResponseSet(BRKind.HALF_OPEN_01)
    return None


def _regular_variance(net, noise, z, i) -> float:
    zr = np.array(z, dtype=float)
    zr[i] = 0.0
    return float(estimation_variances(net, zr, noise)[i])


def best_response(net: InfluenceNetwork, noise: NoiseModel, z, i: int) -> BestResponseSet:
    """Best-response set of agent ``i`` to the other entries of ``z``.

    With another agent stubborn, the exact reachability route of
    :func:`certified_response` is used when it applies; otherwise the
    regular-branch variance is compared with ``sigma_i^2`` using a relative
    tie tolerance of ``1e-12``.
    """
    z = as_profile(z, net.n)
    if not (stubborn_set(z) - {i}):
        A, B = aggregates(net, noise, z, i)
        value = max(0.0, 1.0 - A * net.centrality[i] * noise.sigma2[i] / B)
        return BestResponseSet(BRKind.POINT, value)
    cert = certified_response(net, noise, z, i)
    if cert is not None:
        return cert
    v_reg = _regular_variance(net, noise, z, i)
    v_stub = float(noise.sigma2[i])
    tol = TIE_RTOL * v_stub
    if v_reg < v_stub - tol:
        return BestResponseSet(BRKind.HALF_OPEN_01)
    if v_reg > v_stub + tol:
        return BestResponseSet(BRKind.ONE)
    return BestResponseSet(BRKind.CLOSED_01)


def best_deviation(net: InfluenceNetwork, noise: NoiseModel, z, i: int) -> tuple[float, float]:
    """Largest variance reduction agent ``i`` can obtain alone, and a ``z_i`` achieving it.

    Exact: in the closed-form case the optimum is the point response, and
    otherwise the variance takes only two values (``z_i < 1`` and ``z_i = 1``).
    """
    z = as_profile(z, net.n)
    current = float(estimation_variances(net, z, noise)[i])
    br = best_response(net, noise, z, i)
    if br.kind is BRKind.POINT:
        zb = z.copy()
        zb[i] = br.value
        return current - common_cost(net, zb, noise), br.value
    v_reg = _regular_variance(net, noise, z, i)
    v_stub = float(noise.sigma2[i])
    if v_reg <= v_stub:
        return current - v_reg, 0.0
    return current - v_stub, 1.0


def pareto_segment(net: InfluenceNetwork, noise: NoiseModel) -> ParetoSegment:
    prec = 1.0 / noise.sigma2
    mu = prec / prec.sum()
    direction = net.centrality * noise.sigma2
    for arr in (mu, direction):
        arr.setflags(write=False)
    return ParetoSegment(mu, float(1.0 / prec.sum()), float(1.0 / direction.max()), direction)


def zstar_residual(net, noise, z, alpha) -> float:
    z = np.asarray(z, dtype=float)
    return float(np.max(np.abs((1.0 - z) - alpha * net.centrality * noise.sigma2)))


def zstar_membership(net: InfluenceNetwork, noise: NoiseModel, z) -> tuple[bool, float]:
    """Whether ``z = 1 - alpha pi sigma^2`` for an admissible ``alpha``, and that ``alpha``.

    ``alpha`` is recovered as the mean of the per-agent ratios
    ``(1 - z_i) / (pi_i sigma_i^2)``.
    """
    z = as_profile(z, net.n)
    direction = net.centrality * noise.sigma2
    alpha = float(np.mean((1.0 - z) / direction))
    alpha_star = 1.0 / direction.max()
    ok = (zstar_residual(net, noise, z, alpha) <= ZSTAR_TOL
          and 0.0 < alpha <= alpha_star + ALPHA_SLACK)
    return ok, alpha


def _worst_deviation(net, noise, z):
    gains = [best_deviation(net, noise, z, i) for i in range(net.n)]
    k = int(np.argmax([g for g, _ in gains]))
    return gains[k][0], (k, gains[k][1])


def classify_profile(net: InfluenceNetwork, noise: NoiseModel, z) -> NashReport:
    """Classify ``z`` as a strict interior, certified boundary, numeric-only or non equilibrium.

    Interior profiles are Nash exactly on the Pareto segment. For profiles
    with stubborn agents three necessary conditions are checked first (at
    least two stubborn agents, equal variances among them, ring structure of
    the restricted graph on them); two stubborn agents with globally minimal
    variance are certified; remaining cases are checked agent by agent
    against the best-response sets and reported as numeric only.
    """
    z = as_profile(z, net.n)
    if noise.n != net.n:
        raise ValidationError("noise and network sizes differ")
    S = stubborn_set(z)
    s2 = noise.sigma2
    if not S:
        member, alpha = zstar_membership(net, noise, z)
        cert = [("zstar_membership", member)]
        if member:
            return NashReport(Verdict.STRICT_NASH_INTERIOR, alpha, cert)
        gain, dev = _worst_deviation(net, noise, z)
        return NashReport(Verdict.NOT_NASH, None, cert, gain, dev)

    members = sorted(S)
    cert = [
        ("at_least_two_stubborn", len(S) >= 2),
        ("equal_stubborn_variances", len({float(s2[j]) for j in members}) == 1),
    ]
    if all(ok for _, ok in cert):
        cert.append(("restricted_graph_is_ring", is_directed_ring(restricted_graph(net, S))))
    if not all(ok for _, ok in cert):
        gain, dev = _worst_deviation(net, noise, z)
        return NashReport(Verdict.NOT_NASH, None, cert, gain, dev)

    minimal = float(s2[members[0]]) <= float(s2.min())
    cert.append(("two_stubborn_with_minimal_variance", len(S) == 2 and minimal))
    if cert[-1][1]:
        return NashReport(Verdict.NON_STRICT_BOUNDARY_CERTIFIED, None, cert)

    in_br = [best_response(net, noise, z, i).contains(z[i]) for i in range(net.n)]
    cert.append(("every_agent_in_best_response", all(in_br)))
    gain, dev = _worst_deviation(net, noise, z)
    verdict = Verdict.NASH_NUMERIC_ONLY if all(in_br) else Verdict.NOT_NASH
    return NashReport(verdict, None, cert, gain, dev)
