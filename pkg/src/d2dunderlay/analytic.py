"""Closed-form and quadrature evaluators for coverage, power moments and rates.

These model the network with independent thinning of a Poisson field, so
they are approximations of what the Monte Carlo kernel measures.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from . import geometry
from .netmodel import SystemConfig
from .powerctl import beta_tilde, edppc_coefficients, optimal_tx_probability

EPSABS = 1e-9
EPSREL = 1e-6


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


def quad(f: Callable[[float], float], a: float, b: float, epsabs: float = EPSABS,
         epsrel: float = EPSREL, limit: int = 200, points=None) -> tuple[float, float]:
    """``scipy.integrate.quad`` that raises instead of warning on failure."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                             points=points, full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3 and out[3]:
        raise QuadratureError(f"quadrature on [{a}, {b}] failed: "
                              f"estimate {value:.6g}, error {err:.3g}")
    return value, err


def sinc_norm(x: float) -> float:
    return 1.0 if x == 0 else math.sin(math.pi * x) / (math.pi * x)


class RateValue(NamedTuple):
    nats: float
    bits: float


# power moments E[p^(2/alpha)]

def moment_pk_dppc(cfg: SystemConfig) -> float:
    a = cfg.pathloss_exponent
    return (cfg.rho_rx ** (2 / a) * cfg.d2d_max_range_m ** 2 / 2
            * (1 + cfg.estimation_margin) ** (2 / a))


def moment_pk_edppc(cfg: SystemConfig) -> float:
    """Moment of ``min(U d_kk^a, V d_0k^a)`` with both distances area-uniform."""
    a = cfg.pathloss_exponent
    u, v = edppc_coefficients(cfg)
    a_ = cfg.d2d_max_range_m ** 2 * u ** (2 / a)
    b_ = cfg.cell_radius_m ** 2 * v ** (2 / a)
    return _min_moment(a_, b_)


def _min_moment(a_: float, b_: float) -> float:
    # E[min(A, B)] for A ~ U(0, a_), B ~ U(0, b_) independent
    if a_ <= b_:
        return a_ / 2 - a_ ** 2 / (6 * b_)
    return b_ / 2 - b_ ** 2 / (6 * a_)


def expected_min_max_oracle(sample_a: Callable, sample_b: Callable, n: int,
                            rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo ``(E[min(A, B)], E[max(A, B)])`` for independent A and B.

    ``sample_a`` and ``sample_b`` take ``(rng, n)`` and return ``n`` draws.
    """
    a = np.asarray(sample_a(rng, n), dtype=float)
    b = np.asarray(sample_b(rng, n), dtype=float)
    return float(np.minimum(a, b).mean()), float(np.maximum(a, b).mean())


# geometry helpers

@functools.lru_cache(maxsize=32)
def _farthest_mean_sampled(R: float, num_cues: int) -> float:
    return geometry.farthest_mean_oracle(R, num_cues, 400_000, geometry.rng_stream(20_240_001))


def mean_dkcm(cfg: SystemConfig) -> float:
    """Mean distance from a D2D receiver to the CUE it shares resources with."""
    R = cfg.cell_radius_m
    if cfg.num_cues == 1:
        return geometry.mean_pairwise_distance(R)
    if cfg.num_cues == 2:
        return geometry.conditional_mean_farthest(R)
    return _farthest_mean_sampled(R, cfg.num_cues)


def edppc_tx_probability(cfg: SystemConfig) -> float:
    """Probability that an exp(1)-faded link at area-uniform range passes the gate."""
    a, rd, gate = cfg.pathloss_exponent, cfg.d2d_max_range_m, cfg.edppc_gate
    val, _ = quad(lambda r: 2 * r / rd ** 2 * math.exp(-gate * r ** a), 0.0, rd)
    return val


# derived parameters

@dataclass(frozen=True)
class AnalyticParams:
    theta0: float
    theta_k: float
    a1: float
    a2: float
    kappa: float
    q: float
    lambda_tilde: float
    beta_tilde: float
    moment_pk: float
    mean_dkcm: float


def scheme_tx_probability(beta: float, cfg: SystemConfig, scheme: str) -> float:
    """Fraction of links that pass the activation gate under ``scheme``."""
    if scheme == "dppc":
        if cfg.density_per_m2 <= 0:
            return 1.0
        return optimal_tx_probability(cfg.q, cfg.density_per_m2, beta,
                                      cfg.pathloss_exponent, cfg.d2d_max_range_m)
    if scheme == "edppc":
        return edppc_tx_probability(cfg)
    raise ValueError(f"no analytic model for scheme {scheme!r}")


def scheme_moment(cfg: SystemConfig, scheme: str) -> float:
    if scheme == "dppc":
        return moment_pk_dppc(cfg)
    if scheme == "edppc":
        return moment_pk_edppc(cfg)
    raise ValueError(f"no analytic model for scheme {scheme!r}")


def analytic_params(beta: float, cfg: SystemConfig, scheme: str = "dppc",
                    ptx: float | None = None) -> AnalyticParams:
    """Derived scalars at SINR threshold ``beta`` (used for both link types).

    ``ptx`` defaults to :func:`scheme_tx_probability`.
    """
    a = cfg.pathloss_exponent
    q, lam = cfg.q, cfg.density_per_m2
    moment = scheme_moment(cfg, scheme)
    if ptx is None:
        ptx = scheme_tx_probability(beta, cfg, scheme)
    s = sinc_norm(2 / a)
    p0 = cfg.cue_tx_power_w
    lam_t = q * ptx * lam
    theta = math.pi * lam_t * beta ** (2 / a) * moment / s
    dm = mean_dkcm(cfg)
    kappa = (p0 / (cfg.rho_rx * (1 + cfg.estimation_margin))) ** (2 / a) * dm ** -2
    noise = cfg.effective_noise_w
    return AnalyticParams(theta0=theta, theta_k=theta, a1=beta * noise, a2=beta * noise,
                          kappa=kappa, q=q, lambda_tilde=lam_t,
                          beta_tilde=beta_tilde(q, lam, a, cfg.d2d_max_range_m),
                          moment_pk=moment, mean_dkcm=dm)


# coverage

def cellular_coverage(beta0: float, moment: float, cfg: SystemConfig,
                      ptx: float = 1.0) -> float:
    """Uplink coverage probability at threshold ``beta0``.

    Interference-limited configs use the closed form ``(1 - e^-x) / x``;
    otherwise the noise term is integrated numerically over the CUE
    distance.
    """
    a = cfg.pathloss_exponent
    p0 = cfg.cue_tx_power_w
    R = cfg.cell_radius_m
    theta0 = math.pi * cfg.q * ptx * cfg.density_per_m2 * beta0 ** (2 / a) * moment / sinc_norm(2 / a)
    c = theta0 / p0 ** (2 / a)  # exponent per r^2
    noise = cfg.effective_noise_w
    if noise == 0:
        x = c * R ** 2
        return 1.0 if x < 1e-12 else -math.expm1(-x) / x
    k = beta0 * noise / p0
    val, _ = quad(lambda r: 2 * r / R ** 2 * math.exp(-k * r ** a - c * r * r), 0.0, R)
    return min(val, 1.0)


def cellular_coverage_scheme(beta0: float, cfg: SystemConfig, scheme: str,
                             ptx: float | None = None) -> float:
    """Uplink coverage for ``scheme`` with its power moment and transmit probability."""
    if ptx is None:
        ptx = scheme_tx_probability(beta0, cfg, scheme)
    return cellular_coverage(beta0, scheme_moment(cfg, scheme), cfg, ptx)


def d2d_coverage_dppc(beta: float, cfg: SystemConfig, ptx: float | None = None) -> float:
    """Approximate D2D coverage under gated channel inversion."""
    a = cfg.pathloss_exponent
    p = analytic_params(beta, cfg, "dppc", ptx)
    level = cfg.rho_rx * (1 + cfg.estimation_margin)
    interf = math.exp(-p.theta_k * level ** (-2 / a))
    cue = 1.0 / (1.0 + (beta * cfg.cue_tx_power_w / level) ** (2 / a) * p.mean_dkcm ** -2)
    return float(interf * cue * math.exp(-p.a2 / level))


def d2d_coverage_edppc(beta: float, cfg: SystemConfig, ptx: float | None = None) -> float:
    """D2D coverage under eNB-capped inversion, by two-dimensional quadrature.

    Uses ``x = mu^(1/a) d_0k`` and ``y = d_kk``. Where ``y <= x`` the link
    power is set by the link distance and the coverage factor matches plain
    inversion with level ``U``; otherwise the power is ``U x^a`` and the
    factor depends on ``y / x``.
    """
    a = cfg.pathloss_exponent
    p = analytic_params(beta, cfg, "edppc", ptx)
    u, _ = edppc_coefficients(cfg)
    rd, rc, mu = cfg.d2d_max_range_m, cfg.cell_radius_m, cfg.edppc_mu
    x_max = mu ** (1 / a) * rc
    p0 = cfg.cue_tx_power_w
    th = p.theta_k * u ** (-2 / a)
    lap = (beta * p0 / u) ** (2 / a) * p.mean_dkcm ** -2
    nz = p.a2 / u

    def f_x(x):
        return 2 * x / x_max ** 2

    # link-distance branch: constant factor times P(y <= x)
    const = math.exp(-th) / (1 + lap) * math.exp(-nz)
    p_short, _ = quad(lambda x: f_x(x) * min(x, rd) ** 2 / rd ** 2, 0.0, x_max,
                      points=[rd] if rd < x_max else None)

    def inner(y):
        hi = min(y, x_max)
        if hi <= 0:
            return 0.0

        def g(x):
            if x <= 0:
                return 0.0
            t = (y / x) ** 2
            return (math.exp(-th * t - nz * (y / x) ** a) / (1 + lap * t)) * f_x(x)

        val, _ = quad(g, 0.0, hi)
        return val

    p_long, _ = quad(lambda y: 2 * y / rd ** 2 * inner(y), 0.0, rd)
    return float(min(max(const * p_short + p_long, 0.0), 1.0))


# rates and capacity

def ergodic_rate_dppc(cfg: SystemConfig, ptx: float = 1.0) -> RateValue:
    """Mean D2D link rate from integrating coverage over the threshold."""
    val, _ = quad(lambda x: d2d_coverage_dppc(x, cfg, ptx) / (1 + x), 0.0, math.inf)
    return RateValue(val, val / math.log(2))


def sum_rate_dppc(cfg: SystemConfig, ptx: float = 1.0) -> RateValue:
    """Active-link count in the cell times the mean link rate."""
    area = cfg.q * ptx * cfg.density_per_m2 * math.pi * cfg.cell_radius_m ** 2
    r = ergodic_rate_dppc(cfg, ptx)
    return RateValue(area * r.nats, area * r.bits)


def _capacity_factor(beta: float, cfg: SystemConfig) -> float:
    a = cfg.pathloss_exponent
    p = analytic_params(beta, cfg, "dppc", ptx=1.0)
    return math.log2(1 + beta) / (1 + p.kappa * beta ** (2 / a))


def transmission_capacity_at(beta: float, ptx: float, cfg: SystemConfig) -> float:
    """Density of successful links for a given transmit probability."""
    a = cfg.pathloss_exponent
    ql = cfg.q * cfg.density_per_m2
    expo = math.pi * ql * ptx * beta ** (2 / a) * cfg.d2d_max_range_m ** 2 / (2 * sinc_norm(2 / a))
    return ql * ptx * math.pi * cfg.cell_radius_m ** 2 * _capacity_factor(beta, cfg) * math.exp(-expo)


def capacity_branches(beta: float, cfg: SystemConfig) -> tuple[float, float]:
    """Return the (full scheduling, optimally gated) capacity expressions at ``beta``."""
    a = cfg.pathloss_exponent
    ql = cfg.q * cfg.density_per_m2
    s = sinc_norm(2 / a)
    rd, rc = cfg.d2d_max_range_m, cfg.cell_radius_m
    fac = _capacity_factor(beta, cfg)
    full = ql * math.pi * rc ** 2 * fac * math.exp(-math.pi * ql * beta ** (2 / a) * rd ** 2 / (2 * s))
    gated = 2 * s * rc ** 2 * fac / (beta ** (2 / a) * rd ** 2 * math.e)
    return full, gated


def transmission_capacity(beta: float, cfg: SystemConfig) -> float:
    full, gated = capacity_branches(beta, cfg)
    bt = beta_tilde(cfg.q, cfg.density_per_m2, cfg.pathloss_exponent, cfg.d2d_max_range_m)
    return full if beta <= bt else gated


def sum_rate_integrated(cfg: SystemConfig, upper: float | None = None,
                        rel_cutoff: float = 1e-12, max_decades: int = 80) -> float:
    """Integral of the transmission capacity over all thresholds.

    Without ``upper`` the tail beyond the dropping threshold is integrated
    decade by decade until the integrand falls below ``rel_cutoff`` times
    the running total. For ``alpha >= 4`` the tail integrand decays only
    like ``log(x) / x``, so the value depends on that cutoff; pass ``upper``
    to fix the truncation point explicitly.
    """
    bt = beta_tilde(cfg.q, cfg.density_per_m2, cfg.pathloss_exponent, cfg.d2d_max_range_m)
    if not math.isfinite(bt):
        raise QuadratureError("dropping threshold is infinite for zero density")
    if upper is not None and upper <= bt:
        val, _ = quad(lambda x: capacity_branches(x, cfg)[0], 0.0, upper)
        return val
    total, _ = quad(lambda x: capacity_branches(x, cfg)[0], 0.0, bt)
    lo = bt
    for _ in range(max_decades):
        hi = lo * 10 if upper is None else min(lo * 10, upper)
        part, _ = quad(lambda x: capacity_branches(x, cfg)[1], lo, hi)
        total += part
        if upper is not None:
            if hi >= upper:
                return total
        elif capacity_branches(hi, cfg)[1] < rel_cutoff * total:
            return total
        lo = hi
    raise QuadratureError(f"tail not converged after {max_decades} decades")
