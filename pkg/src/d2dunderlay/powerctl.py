"""Distributed power control for D2D links.

Three schemes are provided, plus a no-control baseline:

* distance-based channel inversion gated by a channel-quality threshold,
* the same inversion capped by the distance to the eNB,
* iterative soft-dropping toward a distance-dependent target SINR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netmodel import SystemConfig


@dataclass(frozen=True)
class PcDecision:
    active: bool
    power_w: float


@dataclass
class SddpcState:
    """Outcome of one soft-dropping power-control run.

    Attributes
    ----------
    powers_w : ndarray
        Final transmit power per link.
    targets : ndarray
        Target SINR per link (linear).
    iterations : int
        Synchronous rounds in which at least one link updated.
    converged : bool
        True if every link ended satisfied or at maximum power.
    link_updates : ndarray
        Number of updates performed by each link.
    sinr : ndarray
        SINR per link under the final powers.
    """

    powers_w: np.ndarray
    targets: np.ndarray
    iterations: int
    converged: bool
    link_updates: np.ndarray
    sinr: np.ndarray


def _sinc(x: float) -> float:
    return 1.0 if x == 0 else math.sin(math.pi * x) / (math.pi * x)


# gated channel inversion

def beta_tilde(q: float, lam: float, alpha: float, R_D: float) -> float:
    """SINR threshold above which links start being dropped."""
    if lam <= 0:
        return math.inf
    return (2 * _sinc(2 / alpha) / (math.pi * q * lam * R_D ** 2)) ** (alpha / 2)


def optimal_tx_probability(q: float, lam: float, beta: float, alpha: float,
                           R_D: float) -> float:
    """Transmit probability maximizing the density of successful links."""
    if lam <= 0:
        return 1.0
    val = 2 * _sinc(2 / alpha) / (math.pi * q * lam * beta ** (2 / alpha) * R_D ** 2)
    return min(val, 1.0)


def dppc_threshold(ptx_star: float, alpha: float, R_D: float) -> float:
    """Channel-quality gate giving transmit probability ``ptx_star``.

    Inverts ``ptx = exp(-gate * E[d^alpha])`` with ``E[d^alpha] = 2 R_D^alpha / (2 + alpha)``.
    """
    if not 0 < ptx_star <= 1:
        raise ValueError("ptx_star must lie in (0, 1]")
    return -math.log(ptx_star) * (2 + alpha) / 2 * R_D ** (-alpha)


def dppc_gate(beta: float, cfg: SystemConfig) -> float:
    ptx = optimal_tx_probability(cfg.q, cfg.density_per_m2, beta,
                                 cfg.pathloss_exponent, cfg.d2d_max_range_m)
    return dppc_threshold(ptx, cfg.pathloss_exponent, cfg.d2d_max_range_m)


def dppc_powers(fading, d_kk, gamma_min: float, cfg: SystemConfig) -> np.ndarray:
    """Vectorized gated inversion; inactive links get power 0."""
    fading = np.asarray(fading, dtype=float)
    d_kk = np.asarray(d_kk, dtype=float)
    a = cfg.pathloss_exponent
    active = (fading * d_kk ** (-a) >= gamma_min) & (d_kk <= cfg.d2d_max_range_m)
    # rho_rx * d^a written relative to R_D so that d = R_D gives P_max exactly
    pmax = cfg.d2d_max_power_w
    p = np.minimum(pmax * (d_kk / cfg.d2d_max_range_m) ** a * (1 + cfg.estimation_margin), pmax)
    return np.where(active, p, 0.0)


def dppc_decide(fading: float, d_kk: float, gamma_min: float,
                cfg: SystemConfig) -> PcDecision:
    p = float(dppc_powers(fading, d_kk, gamma_min, cfg))
    return PcDecision(p > 0, p)


# inversion capped by eNB distance

def edppc_coefficients(cfg: SystemConfig) -> tuple[float, float]:
    """Return ``(U, V)``, the link-distance and eNB-distance power coefficients."""
    u = cfg.rho_rx * (1 + cfg.estimation_margin)
    return u, cfg.edppc_mu * u


def edppc_powers(fading, d_kk, d_0k, cfg: SystemConfig) -> np.ndarray:
    fading = np.asarray(fading, dtype=float)
    d_kk = np.asarray(d_kk, dtype=float)
    d_0k = np.asarray(d_0k, dtype=float)
    a = cfg.pathloss_exponent
    u, v = edppc_coefficients(cfg)
    active = (fading * d_kk ** (-a) >= cfg.edppc_gate) & (d_kk <= cfg.d2d_max_range_m)
    p = np.minimum(np.minimum(u * d_kk ** a, v * d_0k ** a), cfg.d2d_max_power_w)
    return np.where(active, p, 0.0)


def edppc_decide(fading: float, d_kk: float, d_0k: float, cfg: SystemConfig) -> PcDecision:
    p = float(edppc_powers(fading, d_kk, d_0k, cfg))
    return PcDecision(p > 0, p)


# no control

def maxpower_decide(cfg: SystemConfig) -> PcDecision:
    return PcDecision(True, cfg.d2d_max_power_w)


# soft dropping

def sddpc_exponent(cfg: SystemConfig) -> float:
    """Slope of the log-target versus log-distance line (non-positive)."""
    return (math.log10(cfg.sddpc_beta_min / cfg.sddpc_beta_max)
            / math.log10(cfg.d2d_max_range_m / cfg.d2d_min_range_m))


def sddpc_eta(cfg: SystemConfig) -> float:
    """Step exponent of the multiplicative power update."""
    return 1.0 / (1.0 - sddpc_exponent(cfg))


def sddpc_target(d_kk, cfg: SystemConfig):
    """Target SINR, decaying from ``beta_max`` at short range to ``beta_min`` at ``R_D``."""
    d = np.asarray(d_kk, dtype=float)
    r_min, r_max = cfg.d2d_min_range_m, cfg.d2d_max_range_m
    ratio = np.clip(d, r_min, r_max) / r_min
    out = cfg.sddpc_beta_max * ratio ** sddpc_exponent(cfg)
    out = np.where(d <= r_min, cfg.sddpc_beta_max, np.where(d >= r_max, cfg.sddpc_beta_min, out))
    return float(out) if out.ndim == 0 else out


def sddpc_initial_power(cfg: SystemConfig) -> float:
    p = max(cfg.rho_rx * cfg.d2d_min_range_m ** cfg.pathloss_exponent
            * (1 + cfg.estimation_margin), cfg.d2d_min_power_w)
    return min(max(p, cfg.d2d_min_power_w), cfg.d2d_max_power_w)


def sddpc_solve(signal_gain, cross_gain, external, targets, cfg: SystemConfig,
                initial=None) -> SddpcState:
    """Run synchronous soft-dropping updates on a fixed channel.

    Parameters
    ----------
    signal_gain : ndarray, shape (n,)
        Direct-link gain of each link.
    cross_gain : ndarray, shape (n, n)
        ``cross_gain[i, j]`` is the gain from transmitter j to receiver i;
        the diagonal must be zero and non-sharing pairs zero.
    external : ndarray, shape (n,)
        Interference from outside the controlled set plus noise, in watts.
    targets : ndarray, shape (n,)
        Target SINR per link.

    Notes
    -----
    A link counts as satisfied once its SINR reaches
    ``target * (1 - cfg.sddpc_tolerance)``. The update approaches the
    target geometrically, so an exact-equality stop would never trigger.
    """
    g = np.asarray(signal_gain, dtype=float)
    G = np.asarray(cross_gain, dtype=float)
    ext = np.asarray(external, dtype=float)
    tgt = np.asarray(targets, dtype=float)
    n = len(g)
    p_lo, p_hi = cfg.d2d_min_power_w, cfg.d2d_max_power_w
    eta = sddpc_eta(cfg)
    goal = tgt * (1.0 - cfg.sddpc_tolerance)
    p = np.full(n, sddpc_initial_power(cfg) if initial is None else initial, dtype=float)
    updates = np.zeros(n, dtype=int)
    rounds = 0
    converged = n == 0
    s = np.zeros(n)
    for _ in range(cfg.sddpc_max_iters + 1):
        s = p * g / (G @ p + ext)
        pending = (s < goal) & (p < p_hi)
        if not pending.any():
            converged = True
            break
        if rounds == cfg.sddpc_max_iters:
            break
        with np.errstate(divide="ignore"):
            step = np.where(s > 0, (tgt / np.where(s > 0, s, 1.0)) ** eta, np.inf)
        p = np.where(pending, np.clip(p * step, p_lo, p_hi), p)
        updates += pending
        rounds += 1
    return SddpcState(p, tgt, rounds, converged, updates, s)


def sddpc_run(dep, alloc, cfg: SystemConfig, group: int | None = None) -> SddpcState:
    """Soft-dropping power control over a deployment.

    Parameters
    ----------
    dep : Deployment
        Supplies ``d_kk``, ``g_direct``, ``g_lateral`` and ``cue_interference``.
    alloc : AllocationResult
    group : int, optional
        Restrict the run to the links sharing this CUE. By default all links
        run together; groups do not interfere so the result is the same as
        separate per-group runs.
    """
    idx = np.arange(len(dep.d_kk)) if group is None else alloc.members(group)
    a = alloc.assignment[idx]
    same = (a[:, None] == a[None, :]) & ~np.eye(len(idx), dtype=bool)
    G = np.where(same, dep.g_lateral[np.ix_(idx, idx)], 0.0)
    ext = dep.cue_interference(alloc)[idx] + cfg.effective_noise_w
    return sddpc_solve(dep.g_direct[idx], G, ext, sddpc_target(dep.d_kk[idx], cfg), cfg)
