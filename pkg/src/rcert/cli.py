"""Command-line front end: config ingestion, dispatch, and report emission.

Exit codes: 0 when the command completed and every certificate (if any) is
Verified; 2 when a certificate is Falsified or Inconclusive (a correct
answer, distinct from a crash); 1 for configuration or runtime errors.
Reports are emitted through the canonical JSON writer, so identical configs
produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import applications as apps
from .certificates import (
    FALSIFIED,
    INCONCLUSIVE,
    Certificate,
    check_t3_1,
    check_t3_2,
    check_t3_3,
    check_t3_4,
    check_t3_5,
    check_t3_6,
)
from .classify import ClassifyPolicy, classify, export_raster_csv, sweep
from .config import RunConfig, load_config
from .dynamics import IntegrationOptions, export_trajectory_csv, integrate
from .errors import ConfigError, RcertError
from .fields import EquationSpec, InitialData, Rectangle
from .quadrature import HorizonSpec
from .serialize import write_json

__all__ = ["run", "main"]


def _int_opts(cfg: RunConfig, horizon: float | None = None) -> IntegrationOptions:
    o = cfg.options
    return IntegrationOptions(
        rel_tol=o.rel_tol,
        abs_tol=o.abs_tol,
        horizon=o.horizon if horizon is None else horizon,
        escape_threshold=o.escape_threshold,
        min_step=o.min_step,
        max_zeros=o.max_zeros,
        zero_tol=o.zero_tol,
    )


def _ef_params(cfg: RunConfig) -> apps.EFParams:
    d = cfg.eq_doc
    return apps.EFParams(rho=float(d["rho"]), sigma=float(d["sigma"]), n=float(d["n"]), variant=d.get("variant", "absolute"))


def _vdp_params(cfg: RunConfig) -> apps.VdPParams:
    from .fields import time_function_from_json

    d = cfg.eq_doc
    return apps.VdPParams(
        lam=time_function_from_json(d["lambda"], "config.equation.lambda"),
        mu=time_function_from_json(d["mu"], "config.equation.mu"),
        nu=time_function_from_json(d["nu"], "config.equation.nu"),
    )


def _default_bounds(cfg: RunConfig):
    if cfg.bounds is not None:
        return cfg.bounds
    if cfg.eq_kind == "emden_fowler":
        return apps.ef_bound_triple(_ef_params(cfg))
    if cfg.eq_kind == "van_der_pol":
        return apps.vdp_bound_triple(_vdp_params(cfg))
    raise ConfigError("config.bounds", "required for custom equations")


def _cert_summary(cert: Certificate) -> str:
    bits = [f"{cert.theorem}: {cert.status}"]
    if cert.conclusion:
        bits.append(cert.conclusion)
    if cert.uniform_bound is not None:
        bits.append(f"bound={cert.uniform_bound:.6g}")
    if cert.witness is not None:
        w = cert.witness
        bits.append(f"witness ({w.hypothesis}) at t={w.t:.6g}" + (f", w={w.w:.6g}" if w.w is not None else ""))
    if cert.reason:
        bits.append(cert.reason)
    if cert.heuristic_flags:
        bits.append("heuristic: " + ",".join(cert.heuristic_flags))
    return " | ".join(bits)


def _certify(cfg: RunConfig) -> tuple[list[Certificate], dict]:
    eq = cfg.equation
    theorem = cfg.theorem
    region = cfg.region
    extra: dict = {}
    if theorem == "t3_1":
        cert = check_t3_1(
            eq,
            cfg.initial,
            _default_bounds(cfg),
            region=region or Rectangle(eq.t0, eq.t0 + cfg.options.horizon, -float("inf"), float("inf")),
            grid=cfg.grid,
            epsilon=cfg.options.epsilon,
            quad_abs_tol=cfg.options.quad_abs_tol,
            quad_rel_tol=cfg.options.quad_rel_tol,
        )
        if cfg.eq_kind == "emden_fowler":
            p = _ef_params(cfg)
            if p.rho > 1.0:
                ic = cfg.initial
                c2 = ic.t1 ** p.rho * ic.phi1 / ic.phi0 if ic.phi0 != 0 else 0.0
                ab = apps.ef_bounds_A_B(p, ic.t1, ic.phi0, c2)
                cert.uniform_bound = ab.A if ab.A is not None else ab.B
                cert.details["closed_form_case"] = ab.case
        return [cert], extra
    if theorem == "t3_2":
        return [
            check_t3_2(
                eq,
                cfg.initial,
                _default_bounds(cfg),
                cfg.qtilde,
                region=region or Rectangle(eq.t0, eq.t0 + cfg.options.horizon, -float("inf"), float("inf")),
                grid=cfg.grid,
                epsilon=cfg.options.epsilon,
                quad_abs_tol=cfg.options.quad_abs_tol,
                quad_rel_tol=cfg.options.quad_rel_tol,
            )
        ], extra
    if theorem == "t3_3":
        p = _ef_params(cfg)
        majorant = apps.kneser_majorant(p, eq.t0, _int_opts(cfg))
        if region is None:
            w_cap = 1.1 * max(float(np.max(np.abs(majorant.phis))), abs(cfg.initial.phi0))
            region = Rectangle(eq.t0, majorant.t_end, -w_cap, w_cap)
        extra["majorant_span"] = [majorant.t_start, majorant.t_end]
        return [check_t3_3(eq, eq, majorant, cfg.initial, region=region, grid=cfg.grid)], extra
    if theorem == "t3_4":
        return [check_t3_4(eq, _default_bounds(cfg), region=region, grid=cfg.grid)], extra
    if theorem == "t3_5":
        v = _vdp_params(cfg)
        return [
            check_t3_5(
                apps.vdp_equation(v, t0=cfg.equation.t0),
                apps.vdp_bound_triple(v),
                apps.vdp_family(v),
                N=1.0,
                eps0=cfg.options.eps0,
                region=region,
                grid=cfg.grid,
                horizons=HorizonSpec(),
                osc_horizon=cfg.options.osc_horizon,
                osc_min_zeros=cfg.options.osc_min_zeros,
            )
        ], extra
    if theorem == "t3_6":
        return [check_t3_6(eq, region=region, grid=cfg.grid)], extra
    if theorem == "t4_2":
        v = _vdp_params(cfg)
        return [
            apps.check_t4_2(
                v,
                eps0=cfg.options.eps0,
                t0=eq.t0,
                region=region,
                grid=cfg.grid,
                osc_horizon=cfg.options.osc_horizon,
                osc_min_zeros=cfg.options.osc_min_zeros,
            )
        ], extra
    raise ConfigError("command", f"unhandled theorem {theorem!r}")


def _ic_outcomes(cfg: RunConfig, eq: EquationSpec, ics: list[InitialData]) -> list[dict]:
    outcomes = []
    for ic in ics:
        traj = integrate(eq, ic, _int_opts(cfg))
        c = classify(traj)
        outcomes.append(
            {
                "t1": ic.t1,
                "phi0": ic.phi0,
                "phi1": ic.phi1,
                "kind": c.kind,
                "zero_count": c.zero_count,
                "terminal": traj.terminal.to_dict(),
            }
        )
    return outcomes


def run(cfg: RunConfig, out_dir, echo=print) -> tuple[int, dict]:
    """Execute a validated config; write report and artifacts under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report: dict = {"schema_version": 1, "command": cfg.command}
    if cfg.theorem:
        report["theorem"] = cfg.theorem
    report["config"] = cfg.doc
    summaries: list[str] = []
    certificates: list[Certificate] = []
    artifacts: dict = {}

    if cfg.command == "certify":
        certificates, extra = _certify(cfg)
        report.update(extra)
    elif cfg.command == "integrate":
        traj = integrate(cfg.equation, cfg.initial, _int_opts(cfg))
        export_trajectory_csv(traj, out / "trajectory.csv", out / "trajectory.meta.json")
        artifacts["trajectory_csv"] = "trajectory.csv"
        report["terminal"] = traj.terminal.to_dict()
        report["zero_count"] = len(traj.zeros)
        summaries.append(f"integrate: {traj.terminal.kind} at t={traj.terminal.time:.6g}, {len(traj.zeros)} zero(s)")
    elif cfg.command == "classify":
        traj = integrate(cfg.equation, cfg.initial, _int_opts(cfg))
        c = classify(traj)
        report["classification"] = c.to_dict()
        summaries.append(f"classify: {c.kind} ({c.zero_count} zeros, terminal {c.terminal})")
    elif cfg.command == "sweep":
        cells = sweep(
            cfg.equation,
            (cfg.sweep.phi, cfg.sweep.dphi),
            cfg.sweep.resolution,
            _int_opts(cfg),
            ClassifyPolicy(),
        )
        export_raster_csv(cells, out / "raster.csv")
        artifacts["raster_csv"] = "raster.csv"
        hist: dict[str, int] = {}
        for c in cells:
            hist[c.kind] = hist.get(c.kind, 0) + 1
        report["raster"] = {"cells": len(cells), "kinds": {k: hist[k] for k in sorted(hist)}}
        summaries.append("sweep: " + ", ".join(f"{k}={v}" for k, v in sorted(hist.items())))
    elif cfg.command == "emden":
        report_emden(cfg, out, report, summaries, certificates, artifacts)
    elif cfg.command == "vdp":
        report_vdp(cfg, out, report, summaries, certificates, artifacts)
    else:
        raise ConfigError("command", f"unhandled command {cfg.command!r}")

    if certificates:
        report["certificates"] = [c.to_dict() for c in certificates]
        for c in certificates:
            summaries.append(_cert_summary(c))
    if artifacts:
        report["artifacts"] = artifacts
    report["summaries"] = summaries
    write_json(report, out / "report.json")
    for line in summaries:
        echo(line)

    bad = any(c.status in (FALSIFIED, INCONCLUSIVE) for c in certificates)
    return (2 if bad else 0), report


def report_emden(cfg: RunConfig, out: Path, report: dict, summaries: list[str], certificates: list[Certificate], artifacts: dict) -> None:
    p = _ef_params(cfg)
    eq = cfg.equation
    ic = cfg.initial
    report["parameters"] = {"rho": p.rho, "sigma": p.sigma, "n": p.n, "variant": p.variant, "t0": eq.t0}

    if p.rho > 1.0:
        c2 = ic.t1 ** p.rho * ic.phi1 / ic.phi0 if ic.phi0 != 0 else 0.0
        ab = apps.ef_bounds_A_B(p, ic.t1, ic.phi0, c2)
        report["closed_form_bounds"] = {"A": ab.A, "B": ab.B, "case": ab.case}
        cert = check_t3_1(
            eq,
            ic,
            _default_bounds(cfg),
            region=cfg.region or Rectangle(eq.t0, eq.t0 + cfg.options.horizon, -float("inf"), float("inf")),
            grid=cfg.grid,
            epsilon=cfg.options.epsilon,
        )
        cert.uniform_bound = ab.A if ab.A is not None else ab.B
        cert.details["closed_form_case"] = ab.case
        certificates.append(cert)
    if p.rho != 1.0:
        tr = apps.ef_transform(p)
        report["normal_form"] = {"sigma1": tr.sigma1, "branch": tr.branch}
    if p.rho == 0.0 and p.sigma + p.n + 1.0 < 0.0:
        majorant = apps.kneser_majorant(p, eq.t0, _int_opts(cfg))
        w_cap = 1.1 * max(float(np.max(np.abs(majorant.phis))), abs(ic.phi0))
        certificates.append(
            check_t3_3(eq, eq, majorant, ic, region=Rectangle(eq.t0, majorant.t_end, -w_cap, w_cap), grid=cfg.grid)
        )
    if p.rho > 1.0 and p.sigma < -1.0:
        delta = apps.conditional_stability_delta(p, eq.t0, cfg.options.stability_eps)
        outcomes = apps.conditional_stability_experiment(
            p, eq.t0, cfg.options.stability_eps, n_ics=cfg.options.n_stability_ics, horizon=cfg.options.horizon
        )
        report["conditional_stability"] = {
            "eps": cfg.options.stability_eps,
            "delta": delta,
            "outcomes": [
                {"phi0": o.phi0, "sup_norm": o.sup_norm, "within_eps": o.within_eps, "terminal": o.terminal}
                for o in outcomes
            ],
        }
        summaries.append(
            f"conditional stability: delta={delta:.6g}, {sum(o.within_eps for o in outcomes)}/{len(outcomes)} within eps"
        )

    traj = integrate(eq, ic, _int_opts(cfg))
    export_trajectory_csv(traj, out / "trajectory.csv", out / "trajectory.meta.json")
    artifacts["trajectory_csv"] = "trajectory.csv"
    c = classify(traj)
    report["classification"] = c.to_dict()
    summaries.append(f"trajectory: {c.kind}, terminal {traj.terminal.kind}")


def report_vdp(cfg: RunConfig, out: Path, report: dict, summaries: list[str], certificates: list[Certificate], artifacts: dict) -> None:
    v = _vdp_params(cfg)
    eq = cfg.equation
    certificates.append(check_t3_6(eq, region=cfg.region, grid=cfg.grid))
    certificates.append(
        apps.check_t4_2(
            v,
            eps0=cfg.options.eps0,
            t0=eq.t0,
            region=cfg.region,
            grid=cfg.grid,
            osc_horizon=cfg.options.osc_horizon,
            osc_min_zeros=cfg.options.osc_min_zeros,
        )
    )
    rng = np.random.default_rng(cfg.options.seed)
    (p_lo, p_hi), (d_lo, d_hi) = cfg.options.ic_box
    ics = [
        InitialData(t1=eq.t0, phi0=float(rng.uniform(p_lo, p_hi)), phi1=float(rng.uniform(d_lo, d_hi)))
        for _ in range(cfg.options.n_random_ics)
    ]
    outcomes = _ic_outcomes(cfg, eq, ics)
    report["ic_outcomes"] = outcomes
    escapes = sum(1 for o in outcomes if o["terminal"]["kind"] != "reached_horizon")
    summaries.append(f"ic batch: {len(outcomes)} trajectories, {escapes} failed to reach the horizon")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="rcert", description="Certificates and classification for second-order nonlinear ODEs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="path to the JSON run configuration")
        sp.add_argument("--out", required=True, help="output directory for report and CSV artifacts")
        sp.add_argument("--horizon", type=float, default=None, help="override options.horizon")
        sp.add_argument("--tol", type=float, default=None, help="override options.rel_tol")

    certify = sub.add_parser("certify", help="check the hypotheses of one criterion")
    certify.add_argument("theorem", choices=["t3_1", "t3_2", "t3_3", "t3_4", "t3_5", "t3_6", "t4_2"])
    common(certify)
    for name in ("integrate", "classify", "sweep", "emden", "vdp"):
        common(sub.add_parser(name))

    args = parser.parse_args(argv)
    theorem = getattr(args, "theorem", None)
    try:
        cfg = load_config(args.config, args.command, theorem)
        if args.horizon is not None:
            cfg.options = replace(cfg.options, horizon=args.horizon)
        if args.tol is not None:
            cfg.options = replace(cfg.options, rel_tol=args.tol)
        code, _ = run(cfg, args.out)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
