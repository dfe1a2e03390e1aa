"""Command-line driver: config ingestion, dispatch, and report emission.

Commands mirror the pipeline order: validate, orbit, solve, periodic,
homoclinic, blender, robust, and pipeline (all stages, stopping at the
first failure).  Every command writes `report.<command>.kv` (machine
key-value) and `report.<command>.txt` (human summary) into the output
directory; orbit additionally writes `trace.csv` and, unless figures are
disabled, every report is accompanied by a rendered PNG.

Exit statuses: 0 success, 2 config error, 3 stage failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .blender import build_blender, robustness_test, verify_covering
from .center_dynamics import solve_parameters, unfolded_model
from .config import RunConfig, parse_config
from .core_affine import ChartPoint
from .cycle_model import Itinerary, orbit, validate
from .errors import BlenderForgeError, ConfigError
from .periodic_orbits import find_periodic, strong_homoclinic_certificate
from .report import emit_kv, emit_trace_csv


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config("")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _IOFailure(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


class _IOFailure(Exception):
    pass


class _StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _write(out_dir: Path, name: str, text: str) -> Path:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        return path
    except OSError as exc:
        raise _IOFailure(f"cannot write {name}: {exc}") from exc


def _figures_enabled(cfg: RunConfig) -> bool:
    return str(cfg.output.get("figures", "true")).lower() in ("1", "true", "yes")


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except BlenderForgeError as exc:
        raise _StageFailure(name, exc) from exc


# ---------------------------------------------------------------- stages


def _run_validate(cfg: RunConfig):
    report = validate(cfg.model)
    kv = {"command": "validate", "passed": report.passed}
    for i, check in enumerate(report.checks):
        kv[f"checks.{i}.name"] = check.name
        kv[f"checks.{i}.passed"] = check.passed
    txt = "model validation\n" + str(report) + "\n"
    if not report.passed:
        raise _StageFailure("validate", ConfigError("model invariants failed"))
    return kv, txt, report


def _run_orbit(cfg: RunConfig):
    solver = cfg.solver
    word = tuple(
        sym.strip() for sym in str(solver["orbit_itinerary"]).split(",") if sym.strip()
    )
    coords = [float(v) for v in str(solver["orbit_start"]).split(",")]
    s, u = cfg.model.dims.s, cfg.model.dims.u
    if len(coords) != s + 1 + u:
        raise _StageFailure(
            "orbit", ConfigError(f"orbit_start needs {s + 1 + u} coordinates")
        )
    start = ChartPoint(
        str(solver["orbit_chart"]), coords[:s], coords[s], coords[s + 1 :]
    )
    check = str(solver["orbit_check_domains"]).lower() in ("1", "true", "yes")
    trace = _stage(
        "orbit", orbit, cfg.model, start, Itinerary(word), check_domains=check
    )
    kv = {
        "command": "orbit",
        "steps": len(trace) - 1,
        "final.chart": trace[-1].chart,
        "final.y": trace[-1].y,
    }
    txt = (
        "orbit trace\n"
        + f"itinerary: {' '.join(word)}\n"
        + f"steps: {len(trace) - 1}\n"
        + "center trace: "
        + ", ".join(format(p.y, ".6g") for p in trace)
        + "\n"
    )
    return kv, txt, trace


def _run_solve(cfg: RunConfig):
    sol = _stage(
        "solve",
        solve_parameters,
        cfg.model,
        float(cfg.solver["eps"]),
        int(cfg.solver["m_max"]),
    )
    kv = {
        "command": "solve",
        "lam0": sol.lam0,
        "mu0": sol.mu0,
        "t": sol.t,
        "m": sol.m,
        "n": sol.n,
        "nprime": sol.nprime,
        "residuals.0": sol.residuals[0],
        "residuals.1": sol.residuals[1],
        "used_mu_retune": sol.used_mu_retune,
        "expanding_multiplier": sol.expanding_multiplier,
    }
    txt = (
        "two-itinerary coincidence parameters\n"
        + f"lambda0 = {sol.lam0!r}, mu0 = {sol.mu0!r}, t = {sol.t!r}\n"
        + f"itineraries: (m+1, n) = ({sol.m + 1}, {sol.n}); "
        + f"(m, n') = ({sol.m}, {sol.nprime})\n"
        + f"residuals: {sol.residuals[0]:.3e}, {sol.residuals[1]:.3e}\n"
        + f"expanding multiplier mu0^n' lam0^m = {sol.expanding_multiplier!r}\n"
    )
    return kv, txt, sol


def _record_kv(prefix: str, rec) -> dict:
    kv = {
        f"{prefix}.m": rec.return_map.m,
        f"{prefix}.n": rec.return_map.n,
        f"{prefix}.period": rec.return_map.period,
        f"{prefix}.center_eigenvalue": rec.center_eigenvalue,
        f"{prefix}.cylinder_delta": rec.cylinder_delta,
        f"{prefix}.point.y": rec.point.y,
    }
    for i, v in enumerate(rec.point.x):
        kv[f"{prefix}.point.x.{i}"] = v
    for j, v in enumerate(rec.point.z):
        kv[f"{prefix}.point.z.{j}"] = v
    for i, v in enumerate(rec.monodromy_spectrum):
        kv[f"{prefix}.spectrum.{i}"] = v
    return kv


def _solve_and_unfold(cfg: RunConfig):
    sol = _stage(
        "solve",
        solve_parameters,
        cfg.model,
        float(cfg.solver["eps"]),
        int(cfg.solver["m_max"]),
    )
    model = _stage("solve", unfolded_model, cfg.model, sol)
    return sol, model


def _run_periodic(cfg: RunConfig):
    sol, model = _solve_and_unfold(cfg)
    m = int(cfg.solver["m"]) or sol.m
    n = int(cfg.solver["n"]) or sol.nprime
    rec = _stage("periodic", find_periodic, model, m, n)
    kv = {"command": "periodic", **_record_kv("record", rec)}
    txt = (
        "periodic point\n"
        + f"(m, n) = ({m}, {n}), period {rec.return_map.period}\n"
        + f"point: {rec.point.as_vector().tolist()}\n"
        + f"center eigenvalue: {rec.center_eigenvalue!r}\n"
        + f"monodromy spectrum: {list(rec.monodromy_spectrum)}\n"
        + f"cylinder half-width delta: {rec.cylinder_delta!r}\n"
    )
    return kv, txt, (sol, model, rec)


def _periodic_pair(cfg: RunConfig, sol, model):
    a = _stage("periodic", find_periodic, model, sol.m, sol.nprime)
    b = _stage("periodic", find_periodic, model, sol.m + 1, sol.n)
    return a, b


def _run_homoclinic(cfg: RunConfig):
    sol, model = _solve_and_unfold(cfg)
    a, b = _periodic_pair(cfg, sol, model)
    cert = _stage(
        "homoclinic",
        strong_homoclinic_certificate,
        model,
        a,
        b,
        float(cfg.solver["homoclinic_tol"]),
        int(cfg.solver["homoclinic_max_steps"]),
    )
    kv = {
        "command": "homoclinic",
        **_record_kv("owner", a),
        **_record_kv("partner", b),
        "steps_used": cert.steps_used,
        "residual_uu": cert.shadow_residuals[0],
        "residual_ss": cert.shadow_residuals[1],
        "quasi_transverse_rank": cert.quasi_transverse_rank,
        "shadow.y": cert.shadow_point.y,
    }
    for j, v in enumerate(cert.shadow_point.z):
        kv[f"shadow.z.{j}"] = v
    txt = (
        "strong homoclinic certificate\n"
        + f"owner (m, n) = ({a.return_map.m}, {a.return_map.n}), "
        + f"partner (m, n) = ({b.return_map.m}, {b.return_map.n})\n"
        + f"shooting steps: {cert.steps_used}\n"
        + f"residuals (uu, ss): {cert.shadow_residuals[0]:.3e}, "
        + f"{cert.shadow_residuals[1]:.3e}\n"
        + f"quasi-transverse rank: {cert.quasi_transverse_rank}\n"
    )
    return kv, txt, (sol, model, a, b, cert)


def _blender_chain(cfg: RunConfig):
    sol, model = _solve_and_unfold(cfg)
    a, b = _periodic_pair(cfg, sol, model)
    hcert = _stage(
        "homoclinic",
        strong_homoclinic_certificate,
        model,
        a,
        b,
        float(cfg.solver["homoclinic_tol"]),
        int(cfg.solver["homoclinic_max_steps"]),
    )
    region = _stage(
        "blender", build_blender, model, a, hcert, int(cfg.blender["k"])
    )
    cert = _stage("blender", verify_covering, region)
    return sol, model, a, b, hcert, region, cert


def _covering_kv(region, cert) -> dict:
    kv = {
        "covered": cert.covered,
        "margin": cert.margin,
        "margin_lower_bound": cert.margin_lower_bound,
        "interval.lo": cert.interval[0],
        "interval.hi": cert.interval[1],
        "t": region.t,
        "branch1.center_multiplier": region.branches[0].c,
        "branch2.center_multiplier": region.branches[1].c,
    }
    for i, (lo, hi) in enumerate(cert.images_outer, start=1):
        kv[f"image{i}.lo"] = lo
        kv[f"image{i}.hi"] = hi
    for i, v in enumerate(region.region.lo):
        kv[f"region.lo.{i}"] = v
    for i, v in enumerate(region.region.hi):
        kv[f"region.hi.{i}"] = v
    return kv


def _run_blender(cfg: RunConfig):
    sol, model, a, b, hcert, region, cert = _blender_chain(cfg)
    kv = {"command": "blender", **_covering_kv(region, cert)}
    txt = (
        "cu-blender region and covering certificate\n"
        + f"I_c = [{cert.interval[0]!r}, {cert.interval[1]!r}]\n"
        + f"branch center multipliers: {region.branches[0].c!r}, "
        + f"{region.branches[1].c!r}\n"
        + f"covered: {cert.covered}\n"
        + f"margin: {cert.margin!r} (certified lower bound "
        + f"{cert.margin_lower_bound!r})\n"
        + f"unfolding parameter t: {region.t!r}\n"
    )
    if not cert.covered:
        raise _StageFailure(
            "blender", BlenderForgeError(f"covering failed, gap {cert.gap}")
        )
    return kv, txt, (region, cert)


def _run_robust(cfg: RunConfig, seed_override: int | None):
    sol, model, a, b, hcert, region, cert = _blender_chain(cfg)
    seed = int(cfg.blender["seed"]) if seed_override is None else seed_override
    report = _stage(
        "robust",
        robustness_test,
        region,
        float(cfg.blender["delta_c1"]),
        int(cfg.blender["samples"]),
        seed,
    )
    kv = {
        "command": "robust",
        "samples": report.samples,
        "delta_c1": report.delta_c1,
        "seed": report.seed,
        "pass_count": report.pass_count,
        "pass_fraction": report.pass_fraction,
        "worst_margin": report.worst_margin,
        "base_margin": report.base_margin,
        "strips_per_sample": report.strips_per_sample,
        "failures": len(report.failures),
    }
    txt = (
        "robustness report\n"
        + f"samples: {report.samples}, relative size: {report.delta_c1!r}, "
        + f"seed: {report.seed}\n"
        + f"pass fraction: {report.pass_fraction!r} "
        + f"({report.pass_count}/{report.samples})\n"
        + f"worst covering margin: {report.worst_margin!r} "
        + f"(base {report.base_margin!r})\n"
    )
    for idx, reason in report.failures:
        txt += f"failure at sample {idx}: {reason}\n"
    if report.pass_count != report.samples:
        raise _StageFailure(
            "robust",
            BlenderForgeError(
                f"{report.samples - report.pass_count} samples failed"
            ),
        )
    return kv, txt, (region, cert, report)


def _run_pipeline(cfg: RunConfig, seed_override: int | None):
    kv: dict = {"command": "pipeline"}
    lines = ["pipeline"]

    report = validate(cfg.model)
    kv["validate.passed"] = report.passed
    lines.append(f"validate: {'pass' if report.passed else 'FAIL'}")
    if not report.passed:
        raise _StageFailure("validate", ConfigError("model invariants failed"))

    sol, model = _solve_and_unfold(cfg)
    kv["solve.m"] = sol.m
    kv["solve.n"] = sol.n
    kv["solve.nprime"] = sol.nprime
    kv["solve.t"] = sol.t
    lines.append(
        f"solve: (m, n, n') = ({sol.m}, {sol.n}, {sol.nprime}), t = {sol.t!r}"
    )

    a, b = _periodic_pair(cfg, sol, model)
    kv.update(_record_kv("periodic.expanding", a))
    kv.update(_record_kv("periodic.contracting", b))
    lines.append(
        f"periodic: eigenvalues {a.center_eigenvalue!r} (expanding), "
        f"{b.center_eigenvalue!r} (contracting)"
    )

    hcert = _stage(
        "homoclinic",
        strong_homoclinic_certificate,
        model,
        a,
        b,
        float(cfg.solver["homoclinic_tol"]),
        int(cfg.solver["homoclinic_max_steps"]),
    )
    kv["homoclinic.steps_used"] = hcert.steps_used
    kv["homoclinic.residual_uu"] = hcert.shadow_residuals[0]
    kv["homoclinic.residual_ss"] = hcert.shadow_residuals[1]
    lines.append(
        f"homoclinic: residuals {hcert.shadow_residuals[0]:.3e}, "
        f"{hcert.shadow_residuals[1]:.3e} after {hcert.steps_used} steps"
    )

    region = _stage("blender", build_blender, model, a, hcert, int(cfg.blender["k"]))
    cert = _stage("blender", verify_covering, region)
    kv.update({f"blender.{k}": v for k, v in _covering_kv(region, cert).items()})
    lines.append(f"blender: covered = {cert.covered}, margin = {cert.margin!r}")
    if not cert.covered:
        raise _StageFailure(
            "blender", BlenderForgeError(f"covering failed, gap {cert.gap}")
        )

    seed = int(cfg.blender["seed"]) if seed_override is None else seed_override
    rob = _stage(
        "robust",
        robustness_test,
        region,
        float(cfg.blender["delta_c1"]),
        int(cfg.blender["samples"]),
        seed,
    )
    kv["robust.pass_fraction"] = rob.pass_fraction
    kv["robust.worst_margin"] = rob.worst_margin
    lines.append(
        f"robust: pass fraction {rob.pass_fraction!r}, "
        f"worst margin {rob.worst_margin!r}"
    )
    if rob.pass_count != rob.samples:
        raise _StageFailure(
            "robust",
            BlenderForgeError(f"{rob.samples - rob.pass_count} samples failed"),
        )
    lines.append(f"final covering margin: {cert.margin!r}")
    return kv, "\n".join(lines) + "\n", (region, cert, rob)


# ---------------------------------------------------------------- driver


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blender-forge",
        description=(
            "Simulate and certify cu-blenders arising from volume-preserving "
            "co-index-one cycles in piecewise-affine normal form."
        ),
    )
    parser.add_argument(
        "command",
        choices=[
            "validate",
            "orbit",
            "solve",
            "periodic",
            "homoclinic",
            "blender",
            "robust",
            "pipeline",
        ],
    )
    parser.add_argument("--config", default=None, help="path to a run config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        out_dir = Path(args.out if args.out is not None else cfg.output["dir"])
        cmd = args.command
        figure = None
        if cmd == "validate":
            kv, txt, _ = _run_validate(cfg)
        elif cmd == "orbit":
            kv, txt, trace = _run_orbit(cfg)
            _write(out_dir, "trace.csv", emit_trace_csv(trace))
            figure = ("trace.png", "trace", trace)
        elif cmd == "solve":
            kv, txt, _ = _run_solve(cfg)
        elif cmd == "periodic":
            kv, txt, _ = _run_periodic(cfg)
        elif cmd == "homoclinic":
            kv, txt, _ = _run_homoclinic(cfg)
        elif cmd == "blender":
            kv, txt, payload = _run_blender(cfg)
            figure = ("covering.png", "covering", payload[1])
        elif cmd == "robust":
            kv, txt, payload = _run_robust(cfg, args.seed)
            figure = ("covering.png", "covering", payload[1])
        else:
            kv, txt, payload = _run_pipeline(cfg, args.seed)
            figure = ("covering.png", "covering", payload[1])
        _write(out_dir, f"report.{cmd}.kv", emit_kv(kv))
        _write(out_dir, f"report.{cmd}.txt", txt)
        if figure is not None and _figures_enabled(cfg):
            from . import plots

            name, kind, payload = figure
            try:
                if kind == "trace":
                    plots.render_trace(payload, str(out_dir / name))
                else:
                    plots.render_covering(payload, str(out_dir / name))
            except OSError as exc:
                raise _IOFailure(f"cannot render {name}: {exc}") from exc
        print(txt, end="")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _StageFailure as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except BlenderForgeError as exc:
        print(f"stage {args.command} failed: {exc}", file=sys.stderr)
        return 3
    except _IOFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
