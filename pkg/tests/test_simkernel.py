import numpy as np
import pytest

from d2dunderlay import analytic, simkernel as sk
from d2dunderlay.allocation import AllocationResult
from d2dunderlay.geometry import rng_stream
from d2dunderlay.netmodel import SystemConfig, db_to_linear

BETAS = [db_to_linear(b) for b in range(-18, 19, 3)]


def test_empty_deployment_noise_only(dense):
    cfg = dense.replace(density_per_m2=0.0)
    dep = sk.build_deployment(cfg, rng_stream(1))
    assert dep.num_links == 0
    out = sk.run_trial(dep, "dppc", cfg, [1.0, 1e6])
    expect = cfg.cue_tx_power_w * dep.g_cue_enb / cfg.noise_power_w
    assert out.cell_sinr[0] == pytest.approx(expect)
    assert out.d2d_sinr.shape == (2, 0)


def test_deployment_invariants(dense):
    counts = []
    for i in range(3000):
        dep = sk.build_deployment(dense, rng_stream(2, i))
        assert np.all(dep.d_kk <= dense.d2d_max_range_m)
        assert len(dep.d2d_rx) == len(dep.d2d_tx)
        assert np.all(np.diag(dep.g_lateral) == 0)
        counts.append(dep.in_cell.sum())
    assert np.mean(counts) == pytest.approx(39.27, abs=0.5)


def _symmetric_pair(cfg):
    # two links mirrored through the origin, one CUE equidistant from both receivers
    tx = np.array([[-100.0, 0.0], [100.0, 0.0]])
    rx = np.array([[-100.0, 20.0], [100.0, 20.0]])
    n = 2
    return sk.Deployment(
        cues=np.array([[0.0, 300.0]]), d2d_tx=tx, d2d_rx=rx, in_cell=np.ones(n, bool),
        d_kk=np.full(n, 20.0), d_0k=np.full(n, 100.0), d_0c=np.array([300.0]),
        g_cue_enb=np.array([300.0 ** -4]), h_direct=np.ones(n), g_direct=np.full(n, 20.0 ** -4),
        g_tx_enb=np.full(n, 100.0 ** -4), g_cue_rx=np.full((n, 1), 300.0 ** -4),
        g_lateral=np.array([[0.0, 150.0 ** -4], [150.0 ** -4, 0.0]]),
        cue_power_w=cfg.cue_tx_power_w)


@pytest.mark.parametrize("scheme", list(sk.Scheme))
def test_symmetric_links_equal_sinr(scheme, dense):
    out = sk.run_trial(_symmetric_pair(dense), scheme, dense, [1.0])
    assert out.d2d_sinr[0, 0] == pytest.approx(out.d2d_sinr[0, 1], rel=1e-12)


def test_cellular_interferers_are_the_group(dense):
    dep = _symmetric_pair(dense.replace(num_cues=2))
    dep.cues = np.array([[0.0, 300.0], [0.0, -300.0]])
    dep.d_0c = np.array([300.0, 300.0])
    dep.g_cue_enb = np.full(2, 300.0 ** -4)
    dep.g_cue_rx = np.full((2, 2), 300.0 ** -4)
    cfg = dense.replace(num_cues=2, interference_limited=False)
    alloc = AllocationResult(np.array([0, 0]), np.array([2, 0]))
    out = sk.run_trial(dep, "maxpower", cfg, [1.0], alloc=alloc)
    # CUE 1 shares with nobody, so it sees noise only
    assert out.cell_sinr[0, 1] == pytest.approx(0.1 * 300.0 ** -4 / cfg.noise_power_w)
    assert out.cell_sinr[0, 0] < out.cell_sinr[0, 1]


def test_subset_only_raises_sinr(dense):
    for i in range(20):
        dep = sk.build_deployment(dense, rng_stream(3, i))
        for scheme in ("dppc", "edppc", "maxpower"):
            full = sk.run_trial(dep, scheme, dense, [1.0])
            inner = sk.run_trial(dep.subset(dep.in_cell), scheme, dense, [1.0])
            assert np.all(inner.cell_sinr >= full.cell_sinr * (1 - 1e-12))
            assert np.all(inner.d2d_sinr[0] >= full.d2d_sinr[0][dep.in_cell] * (1 - 1e-12))


def test_estimate_degenerate_full_coverage(dense):
    r = sk.estimate(dense, "maxpower", [1e-12], 20)[0]
    assert r.cellular_coverage == 1.0 and r.d2d_coverage == 1.0


@pytest.mark.parametrize("scheme", list(sk.Scheme))
def test_coverage_monotone_in_beta(scheme, dense):
    res = sk.estimate(dense, scheme, BETAS, 150)
    for key in ("cellular_coverage", "d2d_coverage"):
        vals = [getattr(r, key) for r in res]
        assert all(0 <= v <= 1 for v in vals)
        assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_dppc_interference_limited_matches_closed_form(dense):
    cfg = dense.replace(interference_limited=True)
    mc = sk.estimate(cfg, "dppc", [1.0], 2000)[0].cellular_coverage
    assert mc == pytest.approx(analytic.cellular_coverage_scheme(1.0, cfg, "dppc"), abs=0.03)


def test_edppc_d2d_matches_quadrature(dense):
    mc = sk.estimate(dense, "edppc", [1.0], 1000)[0].d2d_coverage
    assert mc == pytest.approx(analytic.d2d_coverage_edppc(1.0, dense), abs=0.05)


def test_determinism_and_parallel_equivalence(dense):
    a = sk.estimate(dense, "sddpc", BETAS[:3], 40)
    b = sk.estimate(dense, "sddpc", BETAS[:3], 40)
    c = sk.estimate(dense, "sddpc", BETAS[:3], 40, workers=2)
    assert a == b
    for x, y in zip(a, c):
        for k, v in vars(x).items():
            if isinstance(v, float):
                assert getattr(y, k) == pytest.approx(v, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("scheme", ["dppc", "sddpc", "maxpower"])
def test_more_cues_raise_coverage(scheme, dense):
    res = [sk.estimate(dense.replace(num_cues=m), scheme, [1.0], 500)[0] for m in (1, 2, 3)]
    assert res[0].cellular_coverage < res[1].cellular_coverage < res[2].cellular_coverage
    assert res[0].d2d_coverage < res[1].d2d_coverage < res[2].d2d_coverage


def test_dppc_more_spectrally_efficient_than_edppc_single_cue(dense):
    cfg = dense.replace(num_cues=1)
    dppc = sk.estimate(cfg, "dppc", [1.0], 1000)[0]
    edppc = sk.estimate(cfg, "edppc", [1.0], 1000)[0]
    assert dppc.sum_rate_bps_hz > edppc.sum_rate_bps_hz
    assert edppc.power_efficiency > dppc.power_efficiency


def test_all_links_flag_counts_dropped_links(dense):
    beta = db_to_linear(18.0)  # above the dropping threshold, so some links are gated off
    act = sk.estimate(dense, "dppc", [beta], 100)[0]
    every = sk.estimate(dense, "dppc", [beta], 100, all_links=True)[0]
    assert every.d2d_coverage < act.d2d_coverage


def test_iteration_samples(dense):
    rounds, per_link, conv = sk.sddpc_iteration_samples(dense, 30)
    assert rounds.shape == (30,) and np.all(rounds <= dense.sddpc_max_iters)
    assert np.all(per_link[np.isfinite(per_link)] <= rounds[np.isfinite(per_link)])
