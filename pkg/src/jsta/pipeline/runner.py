"""Stage orchestration: simulate, retrieve, fit and report."""
from __future__ import annotations

import contextlib
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import interferometer as itf
from .. import spdc
from ..core.matrix_io import read_json, write_json
from ..core.rng import RandomStream
from ..errors import ConfigurationError, JSTAError, MissingDataError
from ..retrieval.chain import retrieve_joint_phase
from ..retrieval.fitting import fit_dispersion
from ..retrieval.fringes import track_fringes
from ..retrieval.spatial import centroid_analysis
from ..retrieval.temporal import compose_field, to_temporal
from . import artifacts as art
from . import plots
from .config import RunConfig

OUTPUT_ROOT_ENV = "JSTA_OUTPUT_ROOT"
MANIFEST = "manifest.json"
RETRIEVAL_REPORT = "retrieval.json"
SIGNAL_POINT = (0.0, 0.0)


@contextlib.contextmanager
def stage(name: str):
    """Prefix errors raised inside the block with the stage name."""
    try:
        yield
    except JSTAError as exc:
        if exc.args and isinstance(exc.args[0], str) and not exc.args[0].startswith("["):
            exc.args = (f"[{name}] {exc.args[0]}",) + exc.args[1:]
        raise


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "jsta-runs"))


def run_directory(cfg: RunConfig, out=None) -> Path:
    if out is not None:
        return Path(out)
    if cfg.output_dir is not None:
        return Path(cfg.output_dir)
    return default_output_root() / f"{cfg.scenario}-seed{cfg.seed}"


def _grids(cfg: RunConfig):
    return spdc.default_grids(cfg.grid.n_points, cfg.grid.spacing)


def _ps_dir(k: int) -> str:
    return f"ps{k:03d}"


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*tasks)))


# --------------------------------------------------------------------------- simulate

def _simulate_point(cfg_dict: dict, k: int, idler_point, run_dir: str):
    cfg = RunConfig.from_dict(cfg_dict)
    d = Path(run_dir) / _ps_dir(k)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    t0 = time.perf_counter()
    name = f"simulate/{_ps_dir(k)} idler {tuple(idler_point)}"
    with stage(name):
        gs, gi = _grids(cfg)
        post = spdc.PostSelection(signal_point=SIGNAL_POINT, idler_point=tuple(idler_point))
        psi = spdc.build_jsa(cfg.pump, cfg.crystal, gs, gi, post, cfg.spatial)
        files += art.save_field(d / "psi", psi)
        arms = {
            "jsi": itf.ShearConfig(cfg.shear.shear, cfg.shear.delay, "signal", True, cfg.shear.phase_drift),
            "ig_signal": itf.ShearConfig(cfg.shear.shear, cfg.shear.delay, "signal", False, cfg.shear.phase_drift),
            "ig_idler": itf.ShearConfig(cfg.shear.shear, cfg.shear.delay, "idler", False, cfg.shear.phase_drift),
        }
        for j, (stem, shear) in enumerate(arms.items()):
            ig = itf.ssi_pattern(psi, shear)
            ig = itf.apply_detector(ig.with_values(ig.values, detector=cfg.detector))
            stream = None if cfg.noiseless else RandomStream(cfg.seed, 3 * k + j)
            ig = itf.measure(ig, stream, cfg.noiseless)
            files += art.save_interferogram(d / stem, ig)

        grid = cfg.scan.grid
        amp = spdc.conditional_signal_amplitude(cfg.spatial, grid, idler_point)
        files += art.save(d / "spatial_intensity", np.abs(amp) ** 2, "spatial_intensity",
                          grid=grid.to_dict(), idler_point=list(idler_point))
        wl = itf.default_wavelength_axis(cfg.spatial.signal_wavelength)
        ref = itf.gaussian_reference(amp, grid, cfg.scan.reference_waist)
        scan = itf.spatial_fringe_pattern(amp, ref, cfg.scan.fringe_delay, grid, wl,
                                          itf.signal_marginal_spectrum(psi, wl), cfg.detector.resolution_ssi)
        files += art.save_fringes(d / "fringes", scan)
    return [str(Path(f).relative_to(run_dir)) for f in files], time.perf_counter() - t0


def _write_manifest(run_dir: Path, cfg: RunConfig, files, stage_name: str, extra=None):
    entries = [{"path": f, "sha256": art.sha256_file(run_dir / f)} for f in sorted(files)]
    payload = {"version": 1, "stage": stage_name, "config_hash": cfg.content_hash(),
               "post_selections": [{"dir": _ps_dir(k), "idler_point": list(p)}
                                   for k, p in enumerate(cfg.scan.idler_points)],
               "files": entries}
    if extra:
        payload.update(extra)
    write_json(run_dir / MANIFEST, payload)


def cmd_simulate(cfg: RunConfig, out=None, jobs: int = 1) -> Path:
    run_dir = run_directory(cfg, out)
    run_dir.mkdir(parents=True, exist_ok=True)
    write_json(run_dir / "config.json", cfg.to_dict())
    tasks = [(cfg.to_dict(), k, p, str(run_dir)) for k, p in enumerate(cfg.scan.idler_points)]
    results = _map(_simulate_point, tasks, jobs)
    files = ["config.json"] + [f for r in results for f in r[0]]
    _write_manifest(run_dir, cfg, files, "simulate")
    return run_dir


# --------------------------------------------------------------------------- retrieve

def load_run(run_dir) -> tuple[RunConfig, dict]:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise MissingDataError(f"run directory not found: {run_dir}")
    manifest = read_json(run_dir / MANIFEST)
    cfg = RunConfig.from_dict(read_json(run_dir / "config.json"))
    return cfg, manifest


def _wrapped_rms(rec: np.ndarray, truth_angle: np.ndarray, mask: np.ndarray, weight=None) -> float:
    """RMS of the phase difference on ``mask`` after removing the mean offset."""
    if not mask.any():
        return float("nan")
    d = np.exp(1j * (rec[mask] - truth_angle[mask]))
    w = np.ones(d.size) if weight is None else weight[mask]
    d = np.angle(d * np.exp(-1j * np.angle(np.sum(w * d))))
    return float(np.sqrt(np.sum(w * d ** 2) / np.sum(w)))


def _retrieve_point(cfg_dict: dict, k: int, idler_point, run_dir: str):
    cfg = RunConfig.from_dict(cfg_dict)
    d = Path(run_dir) / _ps_dir(k)
    rc = cfg.retrieval
    timings = {}
    files = []
    name = f"retrieve/{_ps_dir(k)} idler {tuple(idler_point)}"
    with stage(name):
        t0 = time.perf_counter()
        ig_s = art.load_interferogram(d / "ig_signal", missing="missing signal-axis gradient")
        ig_i = art.load_interferogram(d / "ig_idler", missing="missing idler-axis gradient")
        jsi = art.load_interferogram(d / "jsi", missing="missing joint spectral intensity")
        res = retrieve_joint_phase(ig_s, ig_i, rc.denoise_cutoff, rc.threshold, rc.method)
        fit = res.fit if rc.local_terms else fit_dispersion(res.surface, local=False)
        timings["spectral"] = time.perf_counter() - t0
        files += art.save_gradient(d / "gradient_signal", res.gradient_signal)
        files += art.save_gradient(d / "gradient_idler", res.gradient_idler)
        files += art.save_surface(d / "phase_surface", res.surface)

        t0 = time.perf_counter()
        mag = np.sqrt(np.clip(jsi.values, 0, None))
        field = compose_field(mag, res.surface.values, res.surface.mask, jsi.grid_s, jsi.grid_i)
        jti = to_temporal(field)
        mom = jti.moments() if jti.values.sum() > 0 else {}
        files += art.save(d / "jti", jti.values, "joint_temporal_intensity", grid_a=jti.grid_a.to_dict(),
                          grid_b=jti.grid_b.to_dict(), moments=mom)
        timings["temporal"] = time.perf_counter() - t0

        psi = art.load_field(d / "psi", missing="missing ground-truth amplitude")
        weight = np.abs(psi.values) ** 2
        truth = {"gdd": cfg.pump.gdd, "tod": cfg.pump.tod}
        errors = {
            "phase_rms": _wrapped_rms(res.surface.values, np.angle(psi.values), res.surface.mask),
            "phase_rms_weighted": _wrapped_rms(res.surface.values, np.angle(psi.values), res.surface.mask, weight),
            "gdd_relative": (fit.gdd - truth["gdd"]) / truth["gdd"] if truth["gdd"] else None,
            "tod_relative": (fit.tod - truth["tod"]) / truth["tod"] if truth["tod"] else None,
        }
        fit_payload = {"version": 1, "fit": fit.to_dict(), "truth": truth, "errors": errors,
                       "surface": {"residual_rms": res.surface.residual_rms,
                                   "n_components": res.surface.n_components,
                                   "iterations": res.surface.iterations, "cells": int(res.surface.mask.sum())}}
        files.append(write_json(d / "fit.json", fit_payload))

        t0 = time.perf_counter()
        scan = art.load_fringes(d / "fringes", missing="missing spatial fringe scan")
        wave = track_fringes(scan)
        files += art.save_surface(d / "wavefront", wave, "wavefront")
        x, y = scan.grid.mesh()
        wf_truth = cfg.spatial.signal_wavefront(x, y)
        wf_truth = wf_truth - wf_truth[scan.grid.n_x // 2, scan.grid.n_y // 2]
        wf_err = float(np.sqrt(np.mean((wave.values - wf_truth)[wave.mask] ** 2)))
        inten, meta = art.load(d / "spatial_intensity", "spatial_intensity", "missing spatial intensity")
        row = centroid_analysis({tuple(idler_point): inten.real}, scan.grid)[0]
        timings["spatial"] = time.perf_counter() - t0

    summary = {"dir": _ps_dir(k), "idler_point": list(idler_point), "fit": fit.to_dict(), "errors": errors,
               "wavefront_rms_error": wf_err, "centroid": row.to_dict(), "jti_moments": mom,
               "surface_residual_rms": res.surface.residual_rms}
    return summary, [str(Path(f).relative_to(run_dir)) for f in files], timings


def report_hash(report: dict) -> str:
    d = {k: v for k, v in report.items() if k not in ("timings", "report_hash")}
    return hashlib.sha256(json.dumps(d, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def cmd_retrieve(run_dir, jobs: int = 1) -> dict:
    run_dir = Path(run_dir)
    with stage("retrieve"):
        cfg, manifest = load_run(run_dir)
    tasks = [(cfg.to_dict(), k, p, str(run_dir)) for k, p in enumerate(cfg.scan.idler_points)]
    results = _map(_retrieve_point, tasks, jobs)
    files = sorted(f for r in results for f in r[1])
    report = {
        "version": 1,
        "config": cfg.to_dict(),
        "config_hash": cfg.content_hash(),
        "post_selections": [r[0] for r in results],
        "timings": {r[0]["dir"]: r[2] for r in results},
        "manifest": [{"path": f, "sha256": art.sha256_file(run_dir / f)} for f in files],
    }
    report["report_hash"] = report_hash(report)
    write_json(run_dir / RETRIEVAL_REPORT, report)
    return report


# --------------------------------------------------------------------------- fit

def cmd_fit(run_dir, local: bool = True) -> list[dict]:
    """Re-fit the dispersion model on stored phase surfaces."""
    run_dir = Path(run_dir)
    with stage("fit"):
        cfg, _ = load_run(run_dir)
        out = []
        for k, p in enumerate(cfg.scan.idler_points):
            d = run_dir / _ps_dir(k)
            surf = art.load_surface(d / "phase_surface", missing=f"missing phase surface for {_ps_dir(k)}; run retrieve first")
            fit = fit_dispersion(surf, local=local)
            payload = {"version": 1, "idler_point": list(p), "local_terms": local, "fit": fit.to_dict()}
            write_json(d / ("fit_local.json" if local else "fit_pump_only.json"), payload)
            out.append(payload)
    return out


# --------------------------------------------------------------------------- report

def _freq_axis(meta_grid: dict):
    return art.axis_from_dict(meta_grid).values


def cmd_report(run_dirs, out=None) -> dict:
    if not run_dirs:
        raise ConfigurationError("report needs at least one run directory")
    runs = []
    for rd in run_dirs:
        rd = Path(rd)
        if not rd.is_dir() or not any(rd.iterdir()):
            raise ConfigurationError(f"report: {rd} is not a run directory (empty or missing)")
        with stage(f"report/{rd.name}"):
            rep = read_json(rd / RETRIEVAL_REPORT)
        runs.append((rd, rep))
    out_dir = Path(out) if out is not None else runs[0][0] / "report"
    out_dir.mkdir(parents=True, exist_ok=True)
    svgs = []
    consolidated = {"version": 1, "runs": []}
    for rd, rep in runs:
        tag = rd.name
        labels, gdds, centroids, points = [], [], [], []
        for ps in rep["post_selections"]:
            d = rd / ps["dir"]
            pre = f"{tag}_{ps['dir']}"
            for stem, title in (("ig_signal", "signal-arm interferogram"), ("ig_idler", "idler-arm interferogram"),
                                ("jsi", "joint spectral intensity")):
                ig = art.load_interferogram(d / stem, missing=f"report/{tag}")
                svgs.append(plots.heatmap(out_dir / f"{pre}_{stem}.svg", ig.values, ig.grid_s.values,
                                          ig.grid_i.values, title, "nu_s (rad/fs)", "nu_i (rad/fs)"))
            surf = art.load_surface(d / "phase_surface")
            svgs.append(plots.heatmap(out_dir / f"{pre}_phase_surface.svg", surf.values, surf.grid_a.values,
                                      surf.grid_b.values, "joint spectral phase (rad)", "nu_s (rad/fs)",
                                      "nu_i (rad/fs)", "twilight", surf.mask))
            jti, meta = art.load(d / "jti", "joint_temporal_intensity")
            svgs.append(plots.heatmap(out_dir / f"{pre}_jti.svg", jti.real, _freq_axis(meta["grid_a"]),
                                      _freq_axis(meta["grid_b"]), "joint temporal intensity", "t_s (fs)",
                                      "t_i (fs)"))
            wave = art.load_surface(d / "wavefront", "wavefront")
            svgs.append(plots.heatmap(out_dir / f"{pre}_wavefront.svg", wave.values, wave.grid_a.values,
                                      wave.grid_b.values, "signal wavefront (rad)", "x (mm)", "y (mm)",
                                      "twilight", wave.mask))
            inten, meta = art.load(d / "spatial_intensity", "spatial_intensity")
            g = meta["grid"]
            xs = (np.arange(g["n_x"]) - g["n_x"] // 2) * g["pitch"]
            ys = (np.arange(g["n_y"]) - g["n_y"] // 2) * g["pitch"]
            svgs.append(plots.heatmap(out_dir / f"{pre}_spatial_intensity.svg", inten.real, xs, ys,
                                      "conditional signal intensity", "x (mm)", "y (mm)"))
            labels.append(str(tuple(ps["idler_point"])))
            gdds.append(ps["fit"]["gdd"])
            points.append(ps["idler_point"])
            centroids.append(ps["centroid"]["centroid"])
        truth = rep["config"]["pump"]["c2"] * 2
        svgs.append(plots.fit_summary(out_dir / f"{tag}_fit_summary.svg", labels, gdds, truth))
        svgs.append(plots.centroid_plot(out_dir / f"{tag}_centroids.svg", points, centroids))
        consolidated["runs"].append({
            "run": rd.name, "config_hash": rep["config_hash"], "report_hash": rep["report_hash"],
            "fits": [{"idler_point": ps["idler_point"], **ps["fit"]} for ps in rep["post_selections"]],
            "errors": [{"idler_point": ps["idler_point"], **ps["errors"]} for ps in rep["post_selections"]],
            "centroids": [ps["centroid"] for ps in rep["post_selections"]],
        })
    consolidated["references"] = {"gdd_theory": plots.GDD_THEORY, "gdd_measured": plots.GDD_MEASURED_REFERENCE}
    consolidated["figures"] = sorted(p.name for p in svgs)
    write_json(out_dir / "report.json", consolidated)
    return consolidated

