"""Experiment pipelines that turn a config into data files plus a manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

from atomrb import __version__
from atomrb.clifford import GATES, CliffordGate, random_string, strings_to_json
from atomrb.config import ExperimentConfig
from atomrb.engine import simulate_string
from atomrb.fitting import (
    FitError,
    RBCurve,
    aggregate_array,
    fit_rabi,
    fit_ramsey,
    fit_rb,
    fits_to_csv,
    fits_to_json,
    histogram_to_csv,
)
from atomrb.pulses import PhysicalPulse, PulseNoise, bb1_expand, pulse_elements, simulate_sequence
from atomrb.readout import analytic_summary, characterize, depth_sweep, ndro_sweep, sweep_to_csv
from atomrb.sites import SiteModel, build_array, detuning_scale
from atomrb.su2 import I2, average_gate_fidelity, equal_up_to_global_phase, rotation, rotation_z

# spawn-key tags separating the random streams of each pipeline
NDRO_STREAM = 2
CALIBRATION_STREAM = 3


@dataclass
class RunManifest:
    """What a run wrote, keyed by file name with sha256 content hashes."""

    kind: str
    config_hash: str
    seed: int
    version: str = __version__
    files: dict[str, str] = field(default_factory=dict)
    timing: dict[str, float] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)


class _Writer:
    def __init__(self, out_dir: str | Path, manifest: RunManifest):
        self.root = Path(out_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest

    def write(self, name: str, text: str) -> None:
        data = text.encode()
        (self.root / name).write_bytes(data)
        self.manifest.files[name] = hashlib.sha256(data).hexdigest()

    def close(self) -> RunManifest:
        (self.root / "manifest.json").write_text(self.manifest.to_json())
        return self.manifest


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# randomized benchmarking


def gate_strings(cfg: ExperimentConfig) -> list[list[int]]:
    """The RB strings; shorter sequences are prefixes of each string."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.rb.string_seed))
    longest = max(cfg.rb.lengths)
    return [random_string(longest, rng) for _ in range(cfg.rb.n_strings)]


def _string_task(args):
    return simulate_string(*args[:-1], **args[-1])


def simulate_rb(cfg: ExperimentConfig, workers: int = 1, sites: list[SiteModel] | None = None):
    """Run the RB Monte-Carlo; returns ``(sites, strings, successes, shots)``.

    Count arrays have shape ``(sites, strings, lengths)``.
    """
    cfg.validate()
    sites = build_array(cfg.array_config()) if sites is None else sites
    strings = gate_strings(cfg)
    rabi = 2 * np.pi * cfg.array.rabi_khz * 1e3
    mode = cfg.readout.mode
    kw = dict(
        bb1=cfg.pulse.bb1,
        mode=mode,
        destructive=cfg.destructive_params(),
        ndro=cfg.ndro_params() if mode == "ndro" else None,
    )
    tasks = [
        (s, k, sites, cfg.rb.lengths, cfg.rb.shots_per_point, cfg.seed, rabi, kw) for k, s in enumerate(strings)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_string_task, tasks))
    else:
        results = [_string_task(t) for t in tasks]
    results.sort(key=lambda r: r.string_index)
    succ = np.stack([r.successes for r in results], axis=1)
    shots = np.stack([r.shots for r in results], axis=1)
    return sites, strings, succ, shots


def site_curve(cfg: ExperimentConfig, succ_site: np.ndarray, shots_site: np.ndarray) -> RBCurve:
    """Per-string points for one site, flattened into a single curve."""
    n_strings, n_len = succ_site.shape
    n = np.tile(np.asarray(cfg.rb.lengths), n_strings)
    string = np.repeat(np.arange(n_strings), n_len)
    return RBCurve.from_counts(n, succ_site.ravel(), shots_site.ravel(), cfg.readout.mode, string)


def fit_sites(cfg: ExperimentConfig, succ: np.ndarray, shots: np.ndarray):
    return [fit_rb(site_curve(cfg, succ[i], shots[i]), cfg.fit.survival_scale) for i in range(succ.shape[0])]


def run_rb(cfg: ExperimentConfig, out_dir: str | Path | None = None, workers: int = 1) -> RunManifest:
    """Simulate RB on every site, fit each site, and write the results.

    Files: ``curves.csv``, ``fits.csv``, ``fits.json``, ``histograms.csv``,
    ``strings.json``, ``sites.json`` and ``manifest.json``.
    """
    cfg.validate()
    t0 = time.perf_counter()
    manifest = RunManifest("rb", cfg.digest(), cfg.seed)
    out = _Writer(out_dir or cfg.output_dir, manifest)
    sites, strings, succ, shots = simulate_rb(cfg, workers)
    t_sim = time.perf_counter() - t0
    fits = fit_sites(cfg, succ, shots)
    labels = [f"{s.row}-{s.col}" for s in sites]
    summary = aggregate_array(fits, labels)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["site", "row", "col", "string", "length", "successes", "shots"])
    for i, s in enumerate(sites):
        for k in range(len(strings)):
            for j, n in enumerate(cfg.rb.lengths):
                w.writerow([labels[i], s.row, s.col, k, n, int(succ[i, k, j]), int(shots[i, k, j])])
    out.write("curves.csv", buf.getvalue())
    out.write("fits.csv", fits_to_csv(summary))
    out.write("fits.json", fits_to_json(summary))
    out.write("histograms.csv", histogram_to_csv(summary))
    out.write("strings.json", strings_to_json(strings))
    out.write("sites.json", _json([s.as_dict() for s in sites]))
    out.write("config.json", cfg.to_json())
    manifest.summary = {
        "mode": cfg.readout.mode,
        "n_sites": summary.n_sites,
        "fidelity_mean": summary.fidelity_mean,
        "fidelity_sem": summary.fidelity_sem,
        "spam_mean": summary.spam_mean,
    }
    manifest.timing = {"simulate_s": t_sim, "total_s": time.perf_counter() - t0}
    return out.close()


# ---------------------------------------------------------------------------
# NDRO characterization


def run_ndro_characterization(cfg: ExperimentConfig, out_dir: str | Path | None = None, workers: int = 1) -> RunManifest:
    """Count histogram at the operating point plus duration and depth sweeps.

    ``workers`` is accepted for interface symmetry; the sweeps are
    vectorised and run in-process.
    """
    cfg.validate()
    t0 = time.perf_counter()
    manifest = RunManifest("ndro", cfg.digest(), cfg.seed)
    out = _Writer(out_dir or cfg.output_dir, manifest)
    p = cfg.ndro_params()
    shots = cfg.characterization.shots

    def stream(k):
        return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(NDRO_STREAM, k)))

    point = characterize(p, shots, stream(0))
    durations = [t * 1e-3 for t in cfg.characterization.durations_ms]
    dur = ndro_sweep(durations, p, shots, stream(1))
    dep = depth_sweep(cfg.characterization.depths_mk, p, shots, stream(2))

    out.write("histogram.csv", point.histogram.to_csv())
    out.write("duration_sweep.csv", sweep_to_csv(dur))
    out.write("depth_sweep.csv", sweep_to_csv(dep))
    summary = {k: v for k, v in asdict(point).items() if k != "histogram"}
    summary["analytic"] = analytic_summary(p)
    out.write("summary.json", _json(summary))
    out.write("config.json", cfg.to_json())
    manifest.summary = {k: summary[k] for k in ("fidelity", "survival", "leakage", "p_det_conditional", "threshold")}
    manifest.timing = {"total_s": time.perf_counter() - t0}
    return out.close()


# ---------------------------------------------------------------------------
# microwave calibration


def rabi_flop(sites: Sequence[SiteModel], times, rabi_nominal: float, shots: int, rng: np.random.Generator):
    """Array-averaged ``P(|0>)`` after a resonant pulse of each duration on ``|1>``."""
    eps = np.array([s.rabi / rabi_nominal - 1 for s in sites])[:, None]
    out = np.empty(len(times))
    for k, t in enumerate(times):
        delta = np.stack([detuning_scale(s.t2star) * np.subtract(*rng.standard_gamma(1.5, (2, shots))) for s in sites])
        delta += np.array([s.detuning_offset for s in sites])[:, None]
        _, u01, _, _ = pulse_elements(0.0, rabi_nominal * t, rabi_nominal, eps, delta)
        flips = rng.random(delta.shape) < np.abs(u01) ** 2
        out[k] = flips.mean()
    return out


def ramsey_population(times, detuning, delta):
    """Exact ``P(|0>)`` of a Ramsey sequence with instantaneous pi/2 pulses.

    ``detuning`` is the programmed angular detuning and ``delta`` holds the
    quasi-static offsets, shape ``(shots,)`` or ``(times, shots)``; the
    result has shape ``(times, shots)``.
    """
    t = np.asarray(times, float)[:, None]
    half = rotation(0.0, np.pi / 2)
    phi = (detuning + np.atleast_2d(delta)) * t
    # |1> -> half pulse -> free precession -> half pulse, tracked by amplitudes
    a0, a1 = half[0, 1], half[1, 1]
    a0, a1 = a0 * np.exp(-0.5j * phi), a1 * np.exp(0.5j * phi)
    c0 = half[0, 0] * a0 + half[0, 1] * a1
    return np.abs(c0) ** 2


def run_calibration(cfg: ExperimentConfig, out_dir: str | Path | None = None, workers: int = 1) -> RunManifest:
    """Simulated Rabi flop and per-site Ramsey fits of ``T2*``."""
    cfg.validate()
    t0 = time.perf_counter()
    manifest = RunManifest("calibrate", cfg.digest(), cfg.seed)
    out = _Writer(out_dir or cfg.output_dir, manifest)
    cal = cfg.calibration
    sites = build_array(cfg.array_config())
    rabi = 2 * np.pi * cfg.array.rabi_khz * 1e3

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(CALIBRATION_STREAM, 0)))
    t_rabi = np.asarray(cal.rabi_times_us) * 1e-6
    p_rabi = rabi_flop(sites, t_rabi, rabi, cal.rabi_shots, rng)
    rabi_fit = fit_rabi(t_rabi, p_rabi, cfg.array.rabi_khz * 1e3)

    t_ram = np.asarray(cal.ramsey_times_ms) * 1e-3
    det = 2 * np.pi * cal.ramsey_detuning_hz
    rows = []
    for i, s in enumerate(sites):
        r = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(CALIBRATION_STREAM, 1, i)))
        g = r.standard_gamma(1.5, (2, len(t_ram), cal.ramsey_shots))
        delta = detuning_scale(s.t2star) * (g[0] - g[1])
        prob = ramsey_population(t_ram, det + s.detuning_offset, delta)
        p = (r.random(prob.shape) < prob).mean(axis=1)
        se = np.maximum(np.sqrt(p * (1 - p) / cal.ramsey_shots), 0.5 / cal.ramsey_shots)
        try:
            t2, err = fit_ramsey(t_ram, p, cal.ramsey_detuning_hz + s.detuning_offset / (2 * np.pi), se)
        except FitError:
            t2, err = float("nan"), float("nan")
        rows.append((f"{s.row}-{s.col}", s.t2star, t2, err))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_us", "p0"])
    for t, p in zip(cal.rabi_times_us, p_rabi):
        w.writerow([repr(float(t)), repr(float(p))])
    out.write("rabi_flop.csv", buf.getvalue())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["site", "t2star_true_ms", "t2star_fit_ms", "t2star_err_ms"])
    for lab, tt, tf, te in rows:
        w.writerow([lab, repr(tt * 1e3), repr(tf * 1e3), repr(te * 1e3)])
    out.write("ramsey_fits.csv", buf.getvalue())

    fitted = np.array([r[2] for r in rows]) * 1e3
    fitted = fitted[np.isfinite(fitted)]
    counts, edges = np.histogram(fitted, bins=10)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo_ms", "bin_hi_ms", "count"])
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        w.writerow([repr(float(lo)), repr(float(hi)), int(c)])
    out.write("t2star_histogram.csv", buf.getvalue())

    summary = {
        "rabi_freq_hz": rabi_fit["freq"],
        "rabi_amplitude": rabi_fit["amplitude"],
        "rabi_damping_s": rabi_fit["damping"],
        "t2star_mean_ms": float(fitted.mean()) if fitted.size else float("nan"),
        "t2star_std_ms": float(fitted.std()) if fitted.size else float("nan"),
        "n_sites": len(sites),
        "n_failed_fits": len(rows) - int(fitted.size),
    }
    out.write("summary.json", _json(summary))
    out.write("config.json", cfg.to_json())
    manifest.summary = summary
    manifest.timing = {"total_s": time.perf_counter() - t0}
    return out.close()


# ---------------------------------------------------------------------------
# table self-audit


@dataclass
class VerificationReport:
    soundness_failures: list[int] = field(default_factory=list)
    closure_failures: list[tuple[int, int]] = field(default_factory=list)
    compile_failures: list[tuple[int, int]] = field(default_factory=list)
    bb1_failures: list[str] = field(default_factory=list)
    n_checks: int = 0
    average_area: float = 0.0
    average_area_bb1: float = 0.0

    @property
    def passed(self) -> bool:
        return not (self.soundness_failures or self.closure_failures or self.compile_failures or self.bb1_failures)

    def to_json(self) -> str:
        d = asdict(self)
        d["passed"] = self.passed
        d["average_area_over_pi"] = self.average_area / np.pi
        d["average_area_bb1_over_pi"] = self.average_area_bb1 / np.pi
        return _json(d)


def _frame_compiled(gates: Sequence[CliffordGate], indices) -> np.ndarray:
    frame = 0.0
    u = I2.copy()
    for g in indices:
        for area, dds in gates[g].recipe:
            u = rotation(-(dds + frame), area) @ u
        frame += gates[g].offset
    return rotation_z(frame) @ u


def verify_tables(gates: Sequence[CliffordGate] = GATES, tol: float = 1e-9) -> VerificationReport:
    """Check recipes against unitaries, group closure, frame compilation and BB1.

    Every single gate and every ordered pair is checked.
    """
    rep = VerificationReport()
    n = len(gates)
    for g in gates:
        rep.n_checks += 1
        if not equal_up_to_global_phase(g.recipe_unitary(), g.unitary, tol):
            rep.soundness_failures.append(g.index)
    for i, j in product(range(n), range(n)):
        rep.n_checks += 2
        u = gates[i].unitary @ gates[j].unitary
        if not any(equal_up_to_global_phase(u, h.unitary, tol) for h in gates):
            rep.closure_failures.append((i, j))
        # gate j runs first
        if not equal_up_to_global_phase(_frame_compiled(gates, (j, i)), u, tol):
            rep.compile_failures.append((i, j))
    for theta in sorted({a for g in gates for a, _ in g.recipe}):
        rep.n_checks += 2
        target = rotation(0.3, theta)
        pulse = PhysicalPulse(0.3, theta)
        if not equal_up_to_global_phase(simulate_sequence(bb1_expand(pulse)), target, tol):
            rep.bb1_failures.append(f"noiseless BB1 of area {theta:.6f}")
        noisy = simulate_sequence(bb1_expand(pulse), PulseNoise(amplitude_error=1e-2))
        if 1 - average_gate_fidelity(noisy, target) > 1e-9:
            rep.bb1_failures.append(f"BB1 amplitude robustness of area {theta:.6f}")
    rep.average_area = float(np.mean([g.area for g in gates]))
    rep.average_area_bb1 = float(np.mean([g.area + 4 * np.pi * g.n_pulses for g in gates]))
    return rep
