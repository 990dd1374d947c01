"""Asynchronous randomized best-response dynamics over self-confidence profiles.

At each step one agent, chosen uniformly, replaces its self-confidence by a
uniform draw from its best-response set. Random numbers come from a single
``numpy.random.Generator`` per run and are consumed in a fixed order: one
``integers`` draw for the active agent, then one ``random`` draw only if the
best-response set is an interval.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import NoiseModel, as_profile, common_cost
from .equilibrium import best_response, point_responses, zstar_membership, zstar_residual
from .errors import DiagnosticViolation
from .network import InfluenceNetwork

MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class RunConfig:
    seed: int
    z0: np.ndarray
    max_steps: int = 10**6
    tol_fp: float = 1e-12
    record_every: int = 1

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not self.tol_fp > 0:
            raise ValueError("tol_fp must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


@dataclass(frozen=True)
class TrajectoryRecord:
    t: int
    active_agent: int | None  # None for the initial state
    z: np.ndarray
    V: float | None  # None while some agent is stubborn
    M: float  # inf while some agent is stubborn


@dataclass
class RunSummary:
    converged: bool
    steps: int
    entry_time: int | None
    alpha_hat: float | None
    final_z: np.ndarray
    apriori_bound_ok: bool
    fixed_point_residual: float
    zstar_residual: float | None = None
    in_zstar: bool = False
    seed: int | None = None
    records: int = field(default=0)

    def as_dict(self):
        return {
            "seed": self.seed,
            "converged": self.converged,
            "steps": self.steps,
            "entry_time": self.entry_time,
            "alpha_hat": self.alpha_hat,
            "in_zstar": self.in_zstar,
            "zstar_residual": self.zstar_residual,
            "fixed_point_residual": self.fixed_point_residual,
            "apriori_bound_ok": self.apriori_bound_ok,
            "final_z": [float(v) for v in self.final_z],
        }


def m_statistic(net: InfluenceNetwork, noise: NoiseModel, z) -> float:
    """``max_j pi_j sigma_j^2 / (1 - z_j)``; ``inf`` if some agent is stubborn."""
    z = np.asarray(z)
    if np.any(z == 1.0):
        return float("inf")
    return float(np.max(net.centrality * noise.sigma2 / (1.0 - z)))


def _record(net, noise, t, k, z):
    z = z.copy()
    z.setflags(write=False)
    stubborn = bool(np.any(z == 1.0))
    V = None if stubborn else common_cost(net, z, noise)
    return TrajectoryRecord(t, k, z, V, m_statistic(net, noise, z))


def fixed_point_residual(net, noise, z) -> float:
    """``max_i |z_i - b_i|`` over closed-form responses; ``inf`` with stubborn agents."""
    z = np.asarray(z)
    if np.any(z == 1.0):
        return float("inf")
    return float(np.max(np.abs(z - point_responses(net.centrality, noise.sigma2, z))))


def br_step(net: InfluenceNetwork, noise: NoiseModel, z, rng: np.random.Generator):
    """One activation: returns the new profile and the index of the active agent."""
    k = int(rng.integers(net.n))
    br = best_response(net, noise, z, k)
    z_new = np.array(z, dtype=float)
    z_new[k] = br.sample(rng)
    return z_new, k


def run(net: InfluenceNetwork, noise: NoiseModel, cfg: RunConfig):
    """Iterate :func:`br_step` until a fixed point or ``cfg.max_steps``.

    A fixed point means nobody is stubborn and every agent's closed-form
    response is within ``cfg.tol_fp`` of its current value. States are
    recorded every ``cfg.record_every`` steps, plus the first and last.

    Returns
    -------
    (RunSummary, list[TrajectoryRecord])
    """
    rng = np.random.default_rng(cfg.seed)
    z = as_profile(cfg.z0, net.n).copy()
    trajectory = [_record(net, noise, 0, None, z)]

    entry_time = None
    m_entry = None
    bound_ok = True
    direction = net.centrality * noise.sigma2

    def check_entry(t):
        nonlocal entry_time, m_entry, bound_ok
        stubborn = bool(np.any(z == 1.0))
        if entry_time is None and not stubborn:
            entry_time, m_entry = t, m_statistic(net, noise, z)
        elif entry_time is not None and stubborn:
            raise DiagnosticViolation("no_restubborn", t, "an agent became stubborn after entry")
        if entry_time is not None and np.any(z > 1.0 - direction / m_entry + 1e-12):
            bound_ok = False

    check_entry(0)
    residual = fixed_point_residual(net, noise, z)
    t = 0
    while residual > cfg.tol_fp and t < cfg.max_steps:
        z, k = br_step(net, noise, z, rng)
        t += 1
        check_entry(t)
        residual = fixed_point_residual(net, noise, z)
        if t % cfg.record_every == 0 or residual <= cfg.tol_fp or t == cfg.max_steps:
            trajectory.append(_record(net, noise, t, k, z))

    converged = residual <= cfg.tol_fp
    summary = RunSummary(
        converged=converged,
        steps=t,
        entry_time=entry_time,
        alpha_hat=None,
        final_z=z,
        apriori_bound_ok=bound_ok,
        fixed_point_residual=residual,
        seed=cfg.seed,
        records=len(trajectory),
    )
    if converged:
        member, alpha = zstar_membership(net, noise, z)
        summary.alpha_hat = alpha
        summary.in_zstar = member
        summary.zstar_residual = zstar_residual(net, noise, z, alpha)
    return summary, trajectory


@dataclass
class DiagnosticsReport:
    entry_time: int | None
    m_entry: float | None
    checked_steps: int
    checks: dict = field(default_factory=dict)


def diagnostics(net: InfluenceNetwork, noise: NoiseModel, trajectory) -> DiagnosticsReport:
    """Re-verify the post-entry invariants on a recorded trajectory.

    Checked on every record from the first all-regular one onwards: no agent
    becomes stubborn again, ``M`` and the common cost ``V`` do not increase
    (within ``1e-12``), and each ``z_j`` stays below
    ``1 - pi_j sigma_j^2 / M(entry)``.

    Raises
    ------
    DiagnosticViolation
        naming the first failing check and step.
    """
    if not trajectory:
        raise ValueError("empty trajectory")
    direction = net.centrality * noise.sigma2
    entry = None
    prev = None
    for rec in trajectory:
        z = np.asarray(rec.z)
        stubborn = bool(np.any(z == 1.0))
        if entry is None:
            if stubborn:
                continue
            entry = rec
        elif stubborn:
            raise DiagnosticViolation("no_restubborn", rec.t, "stubborn agent after entry")
        M = m_statistic(net, noise, z)
        V = common_cost(net, z, noise)
        bound = 1.0 - direction / m_statistic(net, noise, entry.z) + 1e-12
        if np.any(z > bound):
            j = int(np.argmax(z - bound))
            raise DiagnosticViolation("apriori_bound", rec.t, f"z[{j}]={z[j]!r} > {bound[j]!r}")
        if prev is not None:
            pM, pV = prev
            if M > pM + MONOTONE_TOL:
                raise DiagnosticViolation("M_monotone", rec.t, f"M rose from {pM!r} to {M!r}")
            if V > pV + MONOTONE_TOL:
                raise DiagnosticViolation("V_monotone", rec.t, f"V rose from {pV!r} to {V!r}")
        prev = (M, V)
    checked = 0 if entry is None else sum(1 for r in trajectory if r.t >= entry.t)
    return DiagnosticsReport(
        entry_time=None if entry is None else entry.t,
        m_entry=None if entry is None else m_statistic(net, noise, entry.z),
        checked_steps=checked,
        checks={name: True for name in ("no_restubborn", "apriori_bound", "M_monotone", "V_monotone")},
    )
