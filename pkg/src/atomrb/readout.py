"""Measurement back-ends: blow-away imaging and non-destructive readout.

State codes used throughout: ``0`` for ``|0> = F=3`` (dark), ``1`` for the
qubit ``|1>`` and ``2`` for a spectator F=4 atom outside the qubit. Detected
states are ``DET0``, ``DET1`` and ``LOST``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, stats

DET0, DET1, LOST = 0, 1, 2


@dataclass(frozen=True)
class DestructiveParams:
    # F=3 atom not seen in the survival image
    miss_f3: float = 0.010
    # F=4 atom surviving the blow-away
    keep_f4: float = 0.005


@dataclass(frozen=True)
class NdroParams:
    """Non-destructive readout model parameters.

    ``detuning`` is in units of the linewidth. Defaults come from
    :func:`calibrate_ndro` and are checked against it in the test suite.
    """

    linewidth: float = 2 * np.pi * 5.2e6  # rad/s
    saturation: float = 1.0
    detuning: float = -0.75
    efficiency: float = 4.633685e-04
    background_rate: float = 600.0  # counts/s
    duration: float = 10e-3  # s
    trap_depth: float = 13.3  # mK
    loss_rate_ref: float = 10.896862  # 1/s at ref_depth
    ref_depth: float = 13.3  # mK
    loss_depth_scale: float = 5.0  # mK
    leak_probability: float = 1.162307e-06  # per scattered photon
    transfer_efficiency: float = 0.99

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValueError("efficiency must lie in (0, 1]")
        if self.saturation <= 0:
            raise ValueError("saturation parameter must be positive")
        if min(self.background_rate, self.duration, self.loss_rate_ref, self.leak_probability) < 0:
            raise ValueError("rates and durations must be non-negative")
        if not 0 <= self.transfer_efficiency <= 1:
            raise ValueError("transfer efficiency must lie in [0, 1]")

    def loss_rate(self, depth: float | None = None) -> float:
        """Heating-loss hazard of a bright atom at trap depth ``depth`` (mK)."""
        u = self.trap_depth if depth is None else depth
        return float(self.loss_rate_ref * np.exp(-(u - self.ref_depth) / self.loss_depth_scale))


def scattering_rate(p: NdroParams) -> float:
    """Two-level photon scattering rate in photons/s."""
    s = p.saturation
    return float(0.5 * p.linewidth * s / (1 + s + (2 * p.detuning) ** 2))


def projective_outcome(state: np.ndarray, rng: np.random.Generator) -> int:
    p0 = abs(state[0]) ** 2 / (abs(state[0]) ** 2 + abs(state[1]) ** 2)
    return 0 if rng.random() < p0 else 1


def destructive_readout(
    state,
    survived,
    rng: np.random.Generator,
    params: DestructiveParams = DestructiveParams(),
):
    """Blow-away then survival image.

    Anything in F=4 (qubit ``|1>`` or spectator) is ejected and so is
    indistinguishable from an atom lost during the sequence. Works on scalars
    or arrays; one uniform draw per shot.
    """
    state = np.asarray(state)
    survived = np.asarray(survived, dtype=bool)
    u = rng.random(state.shape)
    seen = np.where(state == 0, u >= params.miss_f3, u < params.keep_f4) & survived
    out = np.where(seen, DET0, LOST)
    return int(out) if out.ndim == 0 else out


@dataclass
class ShotOutcome:
    """Per-shot NDRO results; every field is an array over shots."""

    present: np.ndarray
    state: np.ndarray
    counts: np.ndarray
    survived: np.ndarray
    leaked: np.ndarray
    # transferred to the cycling transition and scattered for the whole window
    full_window: np.ndarray

    def detected(self, threshold: int) -> np.ndarray:
        det = np.where(self.counts >= threshold, DET1, DET0)
        return np.where(self.survived & self.present, det, LOST)


def ndro_shots(state, p: NdroParams, rng: np.random.Generator, present=None) -> ShotOutcome:
    """Simulate NDRO for a batch of atoms.

    Bright atoms (any F=4 state) reach the stretched state with probability
    ``transfer_efficiency`` and then scatter until they leak to F=3, are
    heated out of the trap, or the window ends. Counts are Poisson in the
    bright time plus Poisson background. Randoms are drawn for every shot so
    results do not depend on which shots are bright.
    """
    state = np.atleast_1d(np.asarray(state))
    n = state.shape[0]
    present = np.ones(n, bool) if present is None else np.asarray(present, bool)
    rate = scattering_rate(p)
    t = p.duration
    u_transfer = rng.random(n)
    kappa = rate * p.leak_probability
    lam = p.loss_rate()
    t_leak = rng.exponential(1 / kappa, n) if kappa > 0 else np.full(n, np.inf)
    t_loss = rng.exponential(1 / lam, n) if lam > 0 else np.full(n, np.inf)
    bright = present & (state != 0) & (u_transfer < p.transfer_efficiency)
    t_end = np.where(bright, np.minimum(np.minimum(t_leak, t_loss), t), 0.0)
    lost = bright & (t_loss < np.minimum(t_leak, t))
    leaked = bright & (t_leak < np.minimum(t_loss, t))
    signal = rng.poisson(p.efficiency * rate * t_end)
    background = rng.poisson(p.background_rate * t, n)
    counts = np.where(present, signal, 0) + background
    return ShotOutcome(
        present=present,
        state=state,
        counts=counts,
        survived=present & ~lost,
        leaked=leaked,
        full_window=bright & ~lost & ~leaked,
    )


def ndro_shot(state: int, p: NdroParams, rng: np.random.Generator) -> dict:
    """Single-shot convenience wrapper around :func:`ndro_shots`."""
    out = ndro_shots(np.array([state]), p, rng)
    return {
        "counts": int(out.counts[0]),
        "survived": bool(out.survived[0]),
        "leaked": bool(out.leaked[0]),
        "full_window": bool(out.full_window[0]),
    }


@dataclass
class CountHistogram:
    bright: np.ndarray
    dark: np.ndarray

    @classmethod
    def from_counts(cls, bright_counts, dark_counts) -> "CountHistogram":
        bright_counts = np.asarray(bright_counts, dtype=int)
        dark_counts = np.asarray(dark_counts, dtype=int)
        top = int(max(bright_counts.max(initial=0), dark_counts.max(initial=0))) + 1
        return cls(
            np.bincount(bright_counts, minlength=top).astype(float),
            np.bincount(dark_counts, minlength=top).astype(float),
        )

    def merged(self, other: "CountHistogram") -> "CountHistogram":
        n = max(len(self.bright), len(other.bright))

        def pad(a):
            return np.pad(a, (0, n - len(a)))

        return CountHistogram(pad(self.bright) + pad(other.bright), pad(self.dark) + pad(other.dark))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["count", "bright_freq", "dark_freq"])
        for k, (b, d) in enumerate(zip(self.bright, self.dark)):
            w.writerow([k, repr(float(b)), repr(float(d))])
        return buf.getvalue()


def optimize_threshold(h: CountHistogram) -> tuple[int, float]:
    """Threshold maximising ``1 - (P_fp + P_fn) / 2``.

    A shot is called bright when ``count >= threshold``. Every threshold from
    0 to one past the largest count is scanned; ties go to the lowest.
    """
    nb, nd = h.bright.sum(), h.dark.sum()
    if nb <= 0 or nd <= 0:
        raise ValueError("both bright and dark populations must be non-empty")
    n = len(h.bright)
    best_thr, best_fid = 0, -1.0
    for thr in range(n + 1):
        p_fn = h.bright[:thr].sum() / nb
        p_fp = h.dark[thr:].sum() / nd
        fid = 1 - (p_fp + p_fn) / 2
        if fid > best_fid + 1e-15:
            best_thr, best_fid = thr, fid
    return best_thr, float(best_fid)


@dataclass
class NdroSummary:
    duration: float
    depth: float
    threshold: int
    fidelity: float
    survival: float
    survival_err: float
    p_det_conditional: float
    p_det_conditional_err: float
    leakage: float
    leakage_err: float
    histogram: CountHistogram = field(repr=False)


def _binom_err(p: float, n: int) -> float:
    return float(np.sqrt(p * (1 - p) / n)) if n > 0 else float("nan")


def characterize(p: NdroParams, shots: int, rng: np.random.Generator, threshold: int | None = None) -> NdroSummary:
    """Monte-Carlo NDRO figures of merit for ``|1>`` and ``|0>`` preparations.

    Fidelity is computed from the histogram of bright atoms that scattered
    for the whole window against ``|0>`` atoms; survival, leakage and the
    loss-corrected detection probability use every ``|1>`` shot. The
    threshold is optimised on the histogram unless ``threshold`` is given.
    """
    one = ndro_shots(np.ones(shots, int), p, rng)
    zero = ndro_shots(np.zeros(shots, int), p, rng)
    if one.full_window.any():
        hist = CountHistogram.from_counts(one.counts[one.full_window], zero.counts)
        thr, fid = optimize_threshold(hist)
    else:
        hist = CountHistogram.from_counts(np.zeros(1, int), zero.counts)
        thr, fid = 1, 0.5
    if threshold is not None:
        thr = int(threshold)
        nb, nd = hist.bright.sum(), hist.dark.sum()
        fid = 1 - (hist.bright[:thr].sum() / nb + hist.dark[thr:].sum() / nd) / 2
    surv = float(one.survived.mean())
    n_surv = int(one.survived.sum())
    det = (one.counts >= thr) & one.survived
    pc = float(det.sum() / n_surv) if n_surv else float("nan")
    leak = float(one.leaked.mean())
    return NdroSummary(
        duration=p.duration,
        depth=p.trap_depth,
        threshold=thr,
        fidelity=fid,
        survival=surv,
        survival_err=_binom_err(surv, shots),
        p_det_conditional=pc,
        p_det_conditional_err=_binom_err(pc, n_surv),
        leakage=leak,
        leakage_err=_binom_err(leak, shots),
        histogram=hist,
    )


def ndro_sweep(durations, p: NdroParams, shots: int, rng: np.random.Generator) -> list[NdroSummary]:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return [characterize(replace(p, duration=float(t)), shots, rng) for t in durations]


def depth_sweep(depths, p: NdroParams, shots: int, rng: np.random.Generator) -> list[NdroSummary]:
    if any(u <= 0 for u in depths):
        raise ValueError("trap depths must be positive")
    return [characterize(replace(p, trap_depth=float(u)), shots, rng) for u in depths]


SWEEP_HEADER = [
    "t_ndro_s",
    "trap_depth_mk",
    "threshold",
    "fidelity",
    "survival",
    "survival_err",
    "p_det_conditional",
    "p_det_conditional_err",
    "leakage",
    "leakage_err",
]


def sweep_to_csv(rows: list[NdroSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow(
            [
                repr(r.duration),
                repr(r.depth),
                r.threshold,
                repr(r.fidelity),
                repr(r.survival),
                repr(r.survival_err),
                repr(r.p_det_conditional),
                repr(r.p_det_conditional_err),
                repr(r.leakage),
                repr(r.leakage_err),
            ]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# analytic model, used for calibration


def poisson_fidelity(bright_mean: float, dark_mean: float) -> tuple[int, float]:
    """Optimal threshold and fidelity between Poisson(bright+dark) and Poisson(dark)."""
    ks = np.arange(0, int(bright_mean + dark_mean + 10 * np.sqrt(bright_mean + dark_mean + 1) + 10))
    p_fp = stats.poisson.sf(ks - 1, dark_mean)
    p_fn = stats.poisson.cdf(ks - 1, bright_mean + dark_mean)
    fid = 1 - (p_fp + p_fn) / 2
    i = int(np.argmax(fid))
    return int(ks[i]), float(fid[i])


def analytic_summary(p: NdroParams) -> dict:
    """Closed-form survival, leakage and conditional detection for ``|1>``."""
    t = p.duration
    rate = scattering_rate(p)
    kappa = rate * p.leak_probability
    lam = p.loss_rate()
    tot = kappa + lam
    tau = p.transfer_efficiency
    ended = 1 - np.exp(-tot * t)
    frac_loss = lam / tot * ended if tot > 0 else 0.0
    frac_leak = kappa / tot * ended if tot > 0 else 0.0
    mu = p.efficiency * rate * t
    mud = p.background_rate * t
    thr, fid = poisson_fidelity(mu, mud)
    p_fp = stats.poisson.sf(thr - 1, mud)
    det = (1 - tau) * p_fp + tau * np.exp(-tot * t) * stats.poisson.sf(thr - 1, mu + mud)
    if kappa > 0:
        det += tau * integrate.quad(
            lambda s: kappa * np.exp(-tot * s) * stats.poisson.sf(thr - 1, p.efficiency * rate * s + mud),
            0,
            t,
            limit=200,
        )[0]
    surv = 1 - tau * frac_loss
    return {
        "threshold": thr,
        "fidelity": fid,
        "survival": float(surv),
        "leakage": float(tau * frac_leak),
        "p_det_conditional": float(det / surv),
    }


def calibrate_ndro(
    base: NdroParams = NdroParams(),
    survival: float = 0.900,
    leakage: float = 0.041,
    fidelity: float = 0.9926,
) -> NdroParams:
    """Fit loss hazard, leak probability and efficiency to target figures.

    Loss and leakage are competing exponential clocks on transferred atoms,
    which fixes both rates in closed form. The efficiency is then the
    smallest value whose optimal-threshold fidelity reaches ``fidelity``
    against the configured background.
    """
    t = base.duration
    tau = base.transfer_efficiency
    lost = 1 - survival
    ended = (lost + leakage) / tau
    if ended >= 1:
        raise ValueError("targets need more than the transferred population")
    tot = -np.log(1 - ended) / t
    lam = tot * lost / (lost + leakage)
    kappa = tot * leakage / (lost + leakage)
    rate = scattering_rate(base)
    mud = base.background_rate * t

    lo, hi = 1e-3, 1e4
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if poisson_fidelity(mid, mud)[1] < fidelity:
            lo = mid
        else:
            hi = mid
    eta = hi / (rate * t)
    ref_rate = lam * np.exp((base.trap_depth - base.ref_depth) / base.loss_depth_scale)
    return replace(
        base,
        efficiency=float(eta),
        leak_probability=float(kappa / rate),
        loss_rate_ref=float(ref_rate),
    )
