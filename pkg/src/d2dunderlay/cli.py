"""Command-line front end: parameter sweeps, analytic cross-checks and
diagnostics, all written as CSV."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import analytic, geometry, simkernel
from .netmodel import ConfigError, SystemConfig, db_to_linear, load_config, validate

EXIT_OK = 0
EXIT_CONFIG_UNREADABLE = 3
EXIT_INVALID_PARAMETER = 4
EXIT_QUADRATURE = 5
EXIT_CHECK_FAILED = 6

SWEEP_COLUMNS = ("scheme", "M", "lambda", "beta_db", "cell_cov", "cell_cov_ci", "d2d_cov",
                 "d2d_cov_ci", "sum_rate", "avg_power_w", "power_eff", "active_links",
                 "trials", "seed")

CELL_TOL = 0.03
D2D_TOL = 0.05


class ConfigReadError(Exception):
    """The config file is missing, unreadable or malformed."""


def parse_beta_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` (inclusive) or a comma list, in dB."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 10) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"invalid beta grid {text!r}") from None


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "nan" if x != x else repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def _write_csv(rows, header, path: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _print_table(rows, header) -> None:
    out = sys.stdout
    widths = [max(len(h), 10) for h in header]
    print("  ".join(h.rjust(w) for h, w in zip(header, widths)), file=out)
    for r in rows:
        cells = [f"{v:.4g}" if isinstance(v, float) else str(v) for v in r]
        print("  ".join(c.rjust(w) for c, w in zip(cells, widths)), file=out)


def _base_config(args) -> SystemConfig:
    cfg = SystemConfig()
    if getattr(args, "config", None):
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise ConfigReadError(f"cannot read config {args.config}: {exc.strerror}") from exc
        except ConfigError as exc:
            raise ConfigReadError(f"malformed config {args.config}: {exc}") from exc
    changes = {}
    if getattr(args, "trials", None) is not None:
        changes["num_trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        changes["rng_seed"] = args.seed
    if getattr(args, "interference_limited", False):
        changes["interference_limited"] = True
    if getattr(args, "mu", None) is not None:
        changes["edppc_mu"] = args.mu
    return cfg.replace(**changes)


def cmd_sweep(args) -> int:
    base = _base_config(args)
    betas_db = parse_beta_grid(args.beta)
    betas = [db_to_linear(b) for b in betas_db]
    Ms = args.M or [base.num_cues]
    lams = args.lam or [base.density_per_m2]
    rows = []
    for scheme in args.scheme:
        for m in Ms:
            for lam in lams:
                cfg = validate(base.replace(num_cues=m, density_per_m2=lam))
                res = simkernel.estimate(cfg, scheme, betas, workers=args.workers,
                                         all_links=args.all_links)
                for bdb, r in zip(betas_db, res):
                    rows.append((r.scheme, r.num_cues, r.density, bdb, r.cellular_coverage,
                                 r.cellular_ci, r.d2d_coverage, r.d2d_ci, r.sum_rate_bps_hz,
                                 r.avg_tx_power_w, r.power_efficiency, r.active_link_count,
                                 r.trials, r.seed))
    _write_csv(rows, SWEEP_COLUMNS, args.output)
    if args.output not in (None, "-"):
        _print_table([(r[0], r[1], r[2], r[3], r[4], r[6], r[8]) for r in rows],
                     ("scheme", "M", "lambda", "beta_db", "cell_cov", "d2d_cov", "sum_rate"))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = validate(_base_config(args))
    betas_db = parse_beta_grid(args.beta)
    betas = [db_to_linear(b) for b in betas_db]
    mc = simkernel.estimate(cfg, args.scheme, betas, workers=args.workers)
    d2d_fn = analytic.d2d_coverage_dppc if args.scheme == "dppc" else analytic.d2d_coverage_edppc
    rows = []
    ok = True
    for bdb, b, r in zip(betas_db, betas, mc):
        ac = analytic.cellular_coverage_scheme(b, cfg, args.scheme)
        ad = d2d_fn(b, cfg)
        dc, dd = abs(ac - r.cellular_coverage), abs(ad - r.d2d_coverage)
        pc, pd = dc <= CELL_TOL, dd <= D2D_TOL
        ok &= pc and pd
        rows.append((bdb, ac, r.cellular_coverage, dc, "pass" if pc else "fail",
                     ad, r.d2d_coverage, dd, "pass" if pd else "fail"))
    header = ("beta_db", "cell_analytic", "cell_mc", "cell_diff", "cell_check",
              "d2d_analytic", "d2d_mc", "d2d_diff", "d2d_check")
    _write_csv(rows, header, args.output)
    if args.output not in (None, "-"):
        _print_table(rows, header)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_moments(args) -> int:
    cfg = validate(_base_config(args))
    rng = geometry.rng_stream(cfg.rng_seed, 0)
    n = args.n
    a = cfg.pathloss_exponent
    d_kk = cfg.d2d_max_range_m * np.sqrt(rng.random(n))
    d_0k = cfg.cell_radius_m * np.sqrt(rng.random(n))
    u = cfg.rho_rx * (1 + cfg.estimation_margin)
    v = cfg.edppc_mu * u
    dppc = float(np.mean((u * d_kk ** a) ** (2 / a)))
    edppc = float(np.mean(np.minimum(u * d_kk ** a, v * d_0k ** a) ** (2 / a)))
    rows = [("dppc", analytic.moment_pk_dppc(cfg), dppc),
            ("edppc", analytic.moment_pk_edppc(cfg), edppc)]
    rows = [(s, f, o, abs(f - o) / f) for s, f, o in rows]
    _write_csv(rows, ("scheme", "formula", "sampled", "rel_diff"), args.output)
    return EXIT_OK


def cmd_alloc_stats(args) -> int:
    cfg = _base_config(args)
    m = args.M if args.M is not None else cfg.num_cues
    if m < 1 or args.n < 1:
        raise ConfigError("M and n must be at least 1")
    rng = geometry.rng_stream(cfg.rng_seed, 0)
    R = cfg.cell_radius_m
    # fresh CUE positions for every link so the fractions average over layouts
    sizes = np.zeros(m)
    batch = 10_000
    done = 0
    while done < args.n:
        k = min(batch, args.n - done)
        rx = geometry.sample_uniform_disk(geometry.ORIGIN, R, rng, size=k)
        cues = geometry.sample_uniform_disk(geometry.ORIGIN, R, rng, size=k * m).reshape(k, m, 2)
        d2 = ((rx[:, None, :] - cues) ** 2).sum(axis=2)
        sizes += np.bincount(np.argmax(d2, axis=1), minlength=m)
        done += k
    rows = [(i, int(s), s / args.n) for i, s in enumerate(sizes)]
    _write_csv(rows, ("cue", "links", "fraction"), args.output)
    return EXIT_OK


def cmd_iter_stats(args) -> int:
    base = _base_config(args)
    rows = []
    for m in args.M or [base.num_cues]:
        cfg = validate(base.replace(num_cues=m))
        rounds, per_link, conv = simkernel.sddpc_iteration_samples(cfg)
        values, counts = np.unique(rounds, return_counts=True)
        mean_upd = float(np.nanmean(per_link)) if np.isfinite(per_link).any() else 0.0
        for v, c in zip(values, counts):
            rows.append((m, int(v), int(c), float(rounds.mean()), mean_upd, float(conv.mean())))
    _write_csv(rows, ("M", "rounds", "trials", "mean_rounds", "mean_link_updates",
                      "converged_frac"), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="d2dunderlay", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, trials=True):
        sp.add_argument("--config", help="key = value parameter file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--output", "-o", help="CSV path (default stdout)")
        if trials:
            sp.add_argument("--trials", type=int)
        sp.add_argument("--interference-limited", action="store_true",
                        help="treat noise power as zero")

    sp = sub.add_parser("sweep", help="Monte Carlo sweep over thresholds")
    common(sp)
    sp.add_argument("--scheme", action="append", choices=[s.value for s in simkernel.Scheme],
                    required=True, help="repeat for several schemes")
    sp.add_argument("--M", type=int, nargs="+")
    sp.add_argument("--lambda", dest="lam", type=float, nargs="+")
    sp.add_argument("--beta", default="-18:18:3", help="dB grid start:stop:step or list")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--all-links", action="store_true",
                    help="count dropped links as coverage failures")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="analytic versus Monte Carlo coverage")
    common(sp)
    sp.add_argument("--scheme", choices=["dppc", "edppc"], required=True)
    sp.add_argument("--beta", default="-18:18:3")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("moments", help="power moment formulas versus sampling")
    common(sp, trials=False)
    sp.add_argument("--n", type=int, default=1_000_000)
    sp.add_argument("--mu", type=float)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("alloc-stats", help="fraction of links per CUE")
    common(sp, trials=False)
    sp.add_argument("--M", type=int)
    sp.add_argument("--n", type=int, default=100_000)
    sp.set_defaults(func=cmd_alloc_stats)

    sp = sub.add_parser("iter-stats", help="soft-dropping iteration histogram")
    common(sp)
    sp.add_argument("--M", type=int, nargs="+")
    sp.set_defaults(func=cmd_iter_stats)
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse takes "-18:18:3" for an option; bind it to its flag explicitly
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--beta":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--beta={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.func(args)
    except ConfigReadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_UNREADABLE
    except ConfigError as exc:
        print(f"error: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID_PARAMETER
    except analytic.QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE


if __name__ == "__main__":
    sys.exit(main())
