"""Monte Carlo engine for coverage, rate and power statistics."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import powerctl
from .allocation import AllocationResult, allocate
from .channel import path_gain, sample_fading
from .geometry import ORIGIN, distance, rng_stream, sample_ppp_disk, sample_uniform_disk
from .netmodel import SystemConfig

Z95 = 1.959963984540054


class Scheme(str, enum.Enum):
    DPPC = "dppc"
    EDPPC = "edppc"
    SDDPC = "sddpc"
    MAXPOWER = "maxpower"


@dataclass
class Deployment:
    """One realization of CUE and D2D positions with frozen fading.

    Gains include fading and path loss. ``g_lateral[i, j]`` is the gain from
    D2D transmitter j to D2D receiver i, with a zero diagonal.
    """

    cues: np.ndarray
    d2d_tx: np.ndarray
    d2d_rx: np.ndarray
    in_cell: np.ndarray
    d_kk: np.ndarray
    d_0k: np.ndarray
    d_0c: np.ndarray
    g_cue_enb: np.ndarray
    h_direct: np.ndarray
    g_direct: np.ndarray
    g_tx_enb: np.ndarray
    g_cue_rx: np.ndarray
    g_lateral: np.ndarray
    cue_power_w: float

    @property
    def num_links(self) -> int:
        return len(self.d_kk)

    def subset(self, keep: np.ndarray) -> "Deployment":
        """The same realization restricted to the links selected by ``keep``."""
        idx = np.flatnonzero(keep)
        fields = {k: v[idx] for k, v in vars(self).items()
                  if k in ("d2d_tx", "d2d_rx", "in_cell", "d_kk", "d_0k", "h_direct",
                           "g_direct", "g_tx_enb", "g_cue_rx")}
        return Deployment(cues=self.cues, d_0c=self.d_0c, g_cue_enb=self.g_cue_enb,
                          g_lateral=self.g_lateral[np.ix_(idx, idx)],
                          cue_power_w=self.cue_power_w, **fields)

    def cue_interference(self, alloc: AllocationResult) -> np.ndarray:
        """Received power at each D2D receiver from the CUE it shares with."""
        n = self.num_links
        return self.cue_power_w * self.g_cue_rx[np.arange(n), alloc.assignment]


def build_deployment(cfg: SystemConfig, rng: np.random.Generator) -> Deployment:
    a = cfg.pathloss_exponent
    m = cfg.num_cues
    cues = sample_uniform_disk(ORIGIN, cfg.cell_radius_m, rng, size=m)
    tx = sample_ppp_disk(cfg.density_per_m2, cfg.deployment_radius_m, rng)
    n = len(tx)
    rx = tx + sample_uniform_disk(ORIGIN, cfg.d2d_max_range_m, rng, size=n)
    d_kk = distance(tx, rx).reshape(n)
    d_0k = distance(tx, ORIGIN).reshape(n)
    d_0c = distance(cues, ORIGIN).reshape(m)
    d_kc = distance(rx[:, None, :], cues[None, :, :]).reshape(n, m)
    d_kl = distance(rx[:, None, :], tx[None, :, :]).reshape(n, n)
    g_lateral = path_gain(sample_fading(rng, (n, n)), d_kl, a)
    np.fill_diagonal(g_lateral, 0.0)
    g_cue_enb = path_gain(sample_fading(rng, m), d_0c, a)
    h_direct = sample_fading(rng, n)
    return Deployment(
        cues=cues, d2d_tx=tx, d2d_rx=rx,
        in_cell=d_0k <= cfg.cell_radius_m,
        d_kk=d_kk, d_0k=d_0k, d_0c=d_0c,
        g_cue_enb=g_cue_enb, h_direct=h_direct,
        g_direct=path_gain(h_direct, d_kk, a),
        g_tx_enb=path_gain(sample_fading(rng, n), d_0k, a),
        g_cue_rx=path_gain(sample_fading(rng, (n, m)), d_kc, a),
        g_lateral=g_lateral,
        cue_power_w=cfg.cue_tx_power_w,
    )


@dataclass
class TrialOutcome:
    """SINRs and powers of one trial for each threshold of the grid.

    Arrays have a leading axis over the threshold grid because gated
    inversion picks its gate per threshold.
    """

    cell_sinr: np.ndarray  # (B, M)
    d2d_sinr: np.ndarray  # (B, N)
    powers_w: np.ndarray  # (B, N)
    assignment: np.ndarray
    in_cell: np.ndarray
    sddpc_iterations: int = 0
    sddpc_link_updates: np.ndarray | None = None
    sddpc_converged: bool = True


class _SinrEvaluator:
    def __init__(self, dep: Deployment, alloc: AllocationResult, cfg: SystemConfig):
        g = alloc.assignment
        self.dep = dep
        self.alloc = alloc
        self.m = cfg.num_cues
        self.noise = cfg.effective_noise_w
        same = g[:, None] == g[None, :]
        self.cross = np.where(same, dep.g_lateral, 0.0)
        self.ext = dep.cue_interference(alloc) + self.noise

    def __call__(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dep = self.dep
        i0 = np.bincount(self.alloc.assignment, weights=p * dep.g_tx_enb, minlength=self.m)
        s0 = dep.cue_power_w * dep.g_cue_enb / (i0 + self.noise)
        sk = p * dep.g_direct / (self.cross @ p + self.ext)
        return s0, sk


def run_trial(dep: Deployment, scheme: Scheme | str, cfg: SystemConfig,
              beta_grid: Sequence[float], alloc: AllocationResult | None = None) -> TrialOutcome:
    """Apply allocation and power control, then evaluate every SINR."""
    scheme = Scheme(scheme)
    if alloc is None:
        alloc = allocate(dep.d2d_rx, dep.cues)
    ev = _SinrEvaluator(dep, alloc, cfg)
    n, nb = dep.num_links, len(beta_grid)
    extra = {}
    if scheme is Scheme.DPPC:
        cache = {}
        cells, d2ds, pows = [], [], []
        for b in beta_grid:
            gate = powerctl.dppc_gate(b, cfg)
            if gate not in cache:
                p = powerctl.dppc_powers(dep.h_direct, dep.d_kk, gate, cfg)
                cache[gate] = (p,) + ev(p)
            p, s0, sk = cache[gate]
            pows.append(p), cells.append(s0), d2ds.append(sk)
        return TrialOutcome(np.array(cells).reshape(nb, -1), np.array(d2ds).reshape(nb, n),
                            np.array(pows).reshape(nb, n), alloc.assignment, dep.in_cell)
    if scheme is Scheme.EDPPC:
        p = powerctl.edppc_powers(dep.h_direct, dep.d_kk, dep.d_0k, cfg)
    elif scheme is Scheme.MAXPOWER:
        p = np.full(n, powerctl.maxpower_decide(cfg).power_w)
    else:
        st = powerctl.sddpc_run(dep, alloc, cfg)
        p = st.powers_w
        extra = dict(sddpc_iterations=st.iterations, sddpc_link_updates=st.link_updates,
                     sddpc_converged=st.converged)
    s0, sk = ev(p)
    return TrialOutcome(np.tile(s0, (nb, 1)), np.tile(sk, (nb, 1)), np.tile(p, (nb, 1)),
                        alloc.assignment, dep.in_cell, **extra)


@dataclass
class SweepResult:
    scheme: str
    num_cues: int
    density: float
    beta: float
    cellular_coverage: float
    cellular_ci: float
    d2d_coverage: float
    d2d_ci: float
    sum_rate_bps_hz: float
    avg_tx_power_w: float
    power_efficiency: float
    active_link_count: float
    successful_link_count: float
    mean_iterations: float
    mean_link_updates: float
    trials: int
    seed: int


# per-threshold tallies accumulated over trials
_COLS = ("cell_hit", "cell_n", "d2d_hit", "d2d_n", "rate", "power", "active")


def _trial_tally(cfg: SystemConfig, scheme: Scheme, betas: np.ndarray, index: int,
                 all_links: bool) -> tuple[np.ndarray, np.ndarray]:
    rng = rng_stream(cfg.rng_seed, index)
    dep = build_deployment(cfg, rng)
    out = run_trial(dep, scheme, cfg, betas)
    tally = np.zeros((len(betas), len(_COLS)))
    inc = dep.in_cell
    for i, b in enumerate(betas):
        p = out.powers_w[i]
        act = inc & (p > 0)
        sk = out.d2d_sinr[i]
        tally[i, 0] = np.count_nonzero(out.cell_sinr[i] >= b)
        tally[i, 1] = cfg.num_cues
        tally[i, 2] = np.count_nonzero(sk[act] >= b)
        tally[i, 3] = np.count_nonzero(inc if all_links else act)
        tally[i, 4] = math.fsum(np.log2(1.0 + sk[act]))
        tally[i, 5] = math.fsum(p[act])
        tally[i, 6] = np.count_nonzero(act)
    upd = out.sddpc_link_updates
    per_link = float(upd[inc].mean()) if upd is not None and inc.any() else 0.0
    scalars = np.array([out.sddpc_iterations, per_link, float(out.sddpc_converged),
                        float(inc.any())])
    return tally, scalars


def _tally_chunk(args):
    cfg, scheme, betas, indices, all_links = args
    return [_trial_tally(cfg, scheme, betas, i, all_links) for i in indices]


def _ci(hits: float, n: float) -> tuple[float, float]:
    if n == 0:
        return math.nan, math.nan
    p = hits / n
    return p, Z95 * math.sqrt(p * (1 - p) / n)


def estimate(cfg: SystemConfig, scheme: Scheme | str, beta_grid: Sequence[float],
             num_trials: int | None = None, workers: int = 1,
             all_links: bool = False) -> list[SweepResult]:
    """Monte Carlo statistics for each threshold of ``beta_grid``.

    Trial ``i`` draws from stream ``(cfg.rng_seed, i)``, so different schemes
    evaluated with the same seed see the same deployments. Coverage is
    pooled over CUEs or over in-cell active links (all in-cell links when
    ``all_links`` is set) with 95% normal-approximation intervals. Sums over
    trials use compensated summation in trial order, so the result does not
    depend on ``workers``.
    """
    scheme = Scheme(scheme)
    T = cfg.num_trials if num_trials is None else num_trials
    if T < 1:
        raise ValueError("num_trials must be at least 1")
    betas = np.asarray(beta_grid, dtype=float)
    if workers > 1:
        chunks = [range(s, min(s + 64, T)) for s in range(0, T, 64)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_tally_chunk, [(cfg, scheme, betas, c, all_links) for c in chunks])
            rows = [r for part in parts for r in part]
    else:
        rows = [_trial_tally(cfg, scheme, betas, i, all_links) for i in range(T)]
    tallies = np.stack([r[0] for r in rows])
    scalars = np.stack([r[1] for r in rows])

    def total(x):
        return math.fsum(x.tolist())

    with_links = scalars[:, 3] > 0
    iters = total(scalars[:, 0]) / T
    upd = total(scalars[with_links, 1]) / max(int(with_links.sum()), 1)
    results = []
    for i, b in enumerate(betas):
        t = tallies[:, i, :]
        s = [total(t[:, j]) for j in range(len(_COLS))]
        cc, cci = _ci(s[0], s[1])
        dc, dci = _ci(s[2], s[3])
        rate, power, active = s[4] / T, s[5] / T, s[6] / T
        results.append(SweepResult(
            scheme=scheme.value, num_cues=cfg.num_cues, density=cfg.density_per_m2,
            beta=float(b), cellular_coverage=cc, cellular_ci=cci,
            d2d_coverage=dc, d2d_ci=dci, sum_rate_bps_hz=rate,
            avg_tx_power_w=s[5] / s[6] if s[6] else 0.0,
            power_efficiency=rate / power if power > 0 else 0.0,
            active_link_count=active, successful_link_count=s[2] / T,
            mean_iterations=iters, mean_link_updates=upd,
            trials=T, seed=cfg.rng_seed))
    return results


def sddpc_iteration_samples(cfg: SystemConfig, num_trials: int | None = None
                            ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-trial soft-dropping statistics.

    Returns
    -------
    rounds : ndarray of int
        Synchronous rounds with at least one update.
    link_updates : ndarray
        Mean updates per in-cell link (NaN for trials without such links).
    converged : ndarray of bool
    """
    T = cfg.num_trials if num_trials is None else num_trials
    rounds = np.zeros(T, dtype=int)
    per_link = np.full(T, np.nan)
    conv = np.zeros(T, dtype=bool)
    for i in range(T):
        dep = build_deployment(cfg, rng_stream(cfg.rng_seed, i))
        st = powerctl.sddpc_run(dep, allocate(dep.d2d_rx, dep.cues), cfg)
        rounds[i], conv[i] = st.iterations, st.converged
        if dep.in_cell.any():
            per_link[i] = st.link_updates[dep.in_cell].mean()
    return rounds, per_link, conv
