"""Per-site physical parameters and the stochastic processes of one shot."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from atomrb.pulses import RABI_DEFAULT

# Variance scale of the thermal dephasing model: <cos(delta t)> = (1 + K (t/T2)^2)^(-3/2).
DEPHASING_K = 0.95


@dataclass(frozen=True)
class SiteModel:
    row: int
    col: int
    rabi: float  # rad/s, actual drive at this site
    t2star: float  # s
    detuning_offset: float = 0.0  # rad/s, static differential light shift
    p_load: float = 0.55
    lifetime: float = 9.7  # s
    survival: float = 0.93  # baseline survival of the gate window
    prep_fidelity: float = 0.971

    def __post_init__(self):
        if self.rabi <= 0 or self.t2star <= 0 or self.lifetime <= 0:
            raise ValueError("rates and times must be positive")
        for name in ("p_load", "survival", "prep_fidelity"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ArrayConfig:
    rows: int = 15
    cols: int = 15
    spacing_um: float = 8.0
    rabi_mean: float = RABI_DEFAULT
    rabi_spread: float = 0.03  # peak-to-peak relative
    t2star_mean: float = 14.09e-3
    t2star_std: float = 0.8e-3
    detuning_offset: float = 0.0  # rad/s, common to all sites
    detuning_offset_std: float = 0.0
    p_load: float = 0.55
    lifetime: float = 9.7
    survival: float = 0.93
    prep_fidelity: float = 0.971
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array needs at least one site")
        if self.rabi_spread < 0 or self.t2star_std < 0:
            raise ValueError("spreads must be non-negative")


def rabi_profile(rows: int, cols: int, spread: float, rng: np.random.Generator) -> np.ndarray:
    """Relative Rabi factors on a smooth quadratic surface.

    The surface is rescaled so that ``max/min - 1`` equals ``spread`` and the
    array mean is 1.
    """
    if rows * cols == 1 or spread == 0:
        return np.ones((rows, cols))
    y, x = np.meshgrid(np.linspace(-1, 1, rows), np.linspace(-1, 1, cols), indexing="ij")
    c = rng.normal(size=6)
    surf = c[0] * x + c[1] * y + c[2] * x * y + c[3] * x**2 + c[4] * y**2 + 0.0 * c[5]
    lo, hi = surf.min(), surf.max()
    if hi - lo < 1e-12:
        return np.ones((rows, cols))
    unit = (surf - lo) / (hi - lo)  # in [0, 1]
    # r = a (1 + spread * unit) has max/min = 1 + spread exactly
    r = 1 + spread * unit
    return r / r.mean()


def build_array(cfg: ArrayConfig) -> list[SiteModel]:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0xA77A,)))
    profile = rabi_profile(cfg.rows, cfg.cols, cfg.rabi_spread, rng)
    n = cfg.rows * cfg.cols
    t2 = cfg.t2star_mean + cfg.t2star_std * rng.standard_normal(n)
    # keep a physically positive T2* in the far tail
    t2 = np.maximum(t2, 0.1 * cfg.t2star_mean)
    off = cfg.detuning_offset + cfg.detuning_offset_std * rng.standard_normal(n)
    sites = []
    for k in range(n):
        r, c = divmod(k, cfg.cols)
        sites.append(
            SiteModel(
                row=r,
                col=c,
                rabi=float(cfg.rabi_mean * profile[r, c]),
                t2star=float(t2[k]),
                detuning_offset=float(off[k]),
                p_load=cfg.p_load,
                lifetime=cfg.lifetime,
                survival=cfg.survival,
                prep_fidelity=cfg.prep_fidelity,
            )
        )
    return sites


def coherence_alpha(t, t2star):
    """Ramsey coherence function, 1 at ``t = 0`` and 1/2 as ``t -> inf``."""
    t = np.asarray(t, dtype=float)
    out = 0.5 + 0.5 * (1 + DEPHASING_K * (t / t2star) ** 2) ** -1.5
    return float(out) if out.ndim == 0 else out


def detuning_scale(t2star: float) -> float:
    return np.sqrt(DEPHASING_K) / t2star


def sample_detuning(t2star: float, rng: np.random.Generator, size=None):
    """Quasi-static detuning (rad/s) with ``<cos(delta t)> = 2 alpha(t) - 1``.

    Drawn as ``s (g1 - g2)`` with ``g1, g2 ~ Gamma(3/2)`` and
    ``s = sqrt(0.95) / T2*``; the characteristic function of that symmetric
    difference is exactly ``(1 + 0.95 (t/T2*)^2)^(-3/2)`` and real.
    """
    if np.isinf(t2star):
        return 0.0 if size is None else np.zeros(size)
    shape = (2,) if size is None else (2, *np.atleast_1d(size))
    g = rng.standard_gamma(1.5, size=shape)
    return detuning_scale(t2star) * (g[0] - g[1])


def predicted_gate_error(rabi: float, t2star: float, avg_area: float = 2.95 * np.pi) -> float:
    """Dephasing-limited error per Clifford, ``(1 - alpha(<t>)) / 2``."""
    return (1 - coherence_alpha(avg_area / rabi, t2star)) / 2


# Atom record codes
EMPTY, COHERENT, SPECTATOR = 0, 1, 2


def prepare_atom(site: SiteModel, rng: np.random.Generator, size=None):
    """Loading and optical pumping.

    Returns ``EMPTY``, ``COHERENT`` (qubit in |1>) or ``SPECTATOR`` (an F=4
    atom in a wrong Zeeman level, inert to the microwaves).
    """
    u = rng.random(size=(2,) if size is None else (2, size))
    loaded = u[0] < site.p_load
    pumped = u[1] < site.prep_fidelity
    out = np.where(loaded, np.where(pumped, COHERENT, SPECTATOR), EMPTY)
    return int(out) if size is None else out


def sequence_survival(site: SiteModel, rng: np.random.Generator, size=None):
    """Whether the atom survives the fixed gate window."""
    out = rng.random(size) < site.survival
    return bool(out) if size is None else out


def lifetime_survival(site: SiteModel, hold: float = 0.375) -> float:
    """Survival of the hold window from vacuum lifetime alone."""
    return float(np.exp(-hold / site.lifetime))
