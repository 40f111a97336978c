"""RB decay fits, Ramsey and Rabi fits, and array-level aggregation."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

from atomrb.sites import coherence_alpha


class FitError(RuntimeError):
    pass


@dataclass
class RBCurve:
    n: np.ndarray
    p: np.ndarray
    shots: np.ndarray
    mode: str = "destructive"
    string: np.ndarray | None = None

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        self.shots = np.asarray(self.shots, dtype=int)
        if not (self.n.shape == self.p.shape == self.shots.shape):
            raise ValueError("n, p and shots must have matching shapes")
        if np.any((self.p < 0) | (self.p > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.mode not in ("destructive", "ndro"):
            raise ValueError(f"unknown readout mode {self.mode!r}")

    @property
    def stderr(self) -> np.ndarray:
        """Binomial standard error, floored at ``1 / (2 shots)``."""
        shots = np.maximum(self.shots, 1)
        se = np.sqrt(self.p * (1 - self.p) / shots)
        return np.maximum(se, 0.5 / shots)

    @classmethod
    def from_counts(cls, n, successes, shots, mode="destructive", string=None) -> "RBCurve":
        shots = np.asarray(shots)
        keep = shots > 0
        p = np.asarray(successes, float)[keep] / shots[keep]
        s = None if string is None else np.asarray(string)[keep]
        return cls(np.asarray(n)[keep], p, shots[keep], mode, s)


@dataclass
class FitResult:
    d: float
    d_spam: float
    d_err: float
    d_spam_err: float
    cov: np.ndarray = field(repr=False)
    chi2: float
    survival_scale: float
    iterations: int = 0

    @property
    def fidelity(self) -> float:
        """Average gate fidelity ``F^2 = 1 - d/2``."""
        return 1 - self.d / 2

    @property
    def fidelity_err(self) -> float:
        return self.d_err / 2

    def as_dict(self) -> dict:
        out = asdict(self)
        out["cov"] = np.asarray(self.cov).tolist()
        out["fidelity"] = self.fidelity
        out["fidelity_err"] = self.fidelity_err
        return out


def rb_model(n, d, d_spam, survival_scale=1.0):
    """``scale * (1/2 + 1/2 (1 - d_spam) (1 - d)^N)``."""
    n = np.asarray(n, dtype=float)
    out = survival_scale * (0.5 + 0.5 * (1 - d_spam) * (1 - d) ** n)
    return float(out) if out.ndim == 0 else out


def rb_jacobian(n, d, d_spam, survival_scale=1.0) -> np.ndarray:
    """Columns are derivatives with respect to ``d`` and ``d_spam``."""
    n = np.asarray(n, dtype=float)
    decay = (1 - d) ** n
    dd = -0.5 * survival_scale * (1 - d_spam) * n * np.where(n > 0, (1 - d) ** np.maximum(n - 1, 0), 0.0)
    ds = -0.5 * survival_scale * decay
    return np.column_stack([dd, ds])


def _loglinear_guess(n, p, w, scale):
    """Log-linear regression of ``2 P / scale - 1`` against ``N``."""
    y = 2 * p / scale - 1
    ok = y > 1e-6
    if ok.sum() >= 2 and np.ptp(n[ok]) > 0:
        slope, icpt = np.polyfit(n[ok], np.log(y[ok]), 1, w=np.sqrt(w[ok]) * y[ok])
        d0 = 1 - np.exp(min(slope, 0.0))
        ds0 = 1 - np.exp(min(icpt, 0.0))
    else:
        d0, ds0 = 1e-3, 0.1
    return np.clip([d0, ds0], 0.0, 1.0)


def _grid_guess(n, p, w, scale):
    """Best point of a coarse grid over the ``[0, 1]`` box."""
    d_grid = np.concatenate([[0.0], np.logspace(-7, np.log10(0.5), 40)])
    s_grid = np.linspace(0.0, 1.0, 41)
    decay = (1 - d_grid[:, None]) ** n[None, :]
    best, best_cost = None, np.inf
    for ds in s_grid:
        r = p[None, :] - scale * (0.5 + 0.5 * (1 - ds) * decay)
        cost = np.sum(w[None, :] * r * r, axis=1)
        i = int(np.argmin(cost))
        if cost[i] < best_cost:
            best, best_cost = np.array([d_grid[i], ds]), cost[i]
    return best


def _model_stderr(n, shots, theta, scale):
    m = np.clip(rb_model(n, theta[0], theta[1], scale), 0.0, 1.0)
    shots = np.maximum(shots, 1)
    return np.maximum(np.sqrt(m * (1 - m) / shots), 0.5 / shots)


def _gauss_newton(n, p, w, scale, theta, max_iter, rtol):
    def cost(th):
        r = p - rb_model(n, th[0], th[1], scale)
        return float(np.sum(w * r * r))

    damping = 1e-3
    c = cost(theta)
    for it in range(1, max_iter + 1):
        r = p - rb_model(n, theta[0], theta[1], scale)
        jac = rb_jacobian(n, theta[0], theta[1], scale)
        a = jac.T @ (w[:, None] * jac)
        g = jac.T @ (w * r)
        if not np.all(np.isfinite(a)) or abs(np.linalg.det(a)) < 1e-300:
            raise FitError("singular normal matrix")
        # parameters pinned at a bound with the gradient pointing outward stay fixed
        free = ~(((theta <= 0) & (g < 0)) | ((theta >= 1) & (g > 0)))
        improved = False
        while damping <= 1e12:
            step = np.zeros(2)
            if free.any():
                af = a[np.ix_(free, free)]
                step[free] = np.linalg.solve(af + damping * np.diag(np.diag(af)), g[free])
            trial = np.clip(theta + step, 0.0, 1.0)
            ct = cost(trial)
            if ct <= c:
                improved = True
                break
            damping *= 10
        if not improved:
            # no descent direction left inside the box
            return theta, c, it
        moved = trial - theta
        theta, c = trial, ct
        damping = max(damping / 10, 1e-12)
        if np.all(np.abs(moved) <= rtol * np.maximum(np.abs(theta), 1e-8)):
            return theta, c, it
    raise FitError(f"no convergence after {max_iter} iterations")


def fit_rb(
    curve: RBCurve,
    survival_scale: float = 1.0,
    max_iter: int = 200,
    rtol: float = 1e-10,
    reweight: int = 10,
) -> FitResult:
    """Weighted least-squares fit of ``(d, d_spam)`` by damped Gauss-Newton.

    The first pass weights points by ``1 / stderr^2`` from the observed
    probabilities. Later passes (up to ``reweight``) use the binomial
    variance of the fitted model instead, which removes the bias of
    weighting by noisy observations at small shot counts. Parameters stay in
    ``[0, 1]``. Standard errors come from the inverse weighted normal matrix
    at the optimum.
    """
    n, p = curve.n, curve.p
    if len(np.unique(n)) < 3:
        raise FitError("need at least three distinct sequence lengths")
    if not 0 < survival_scale <= 1:
        raise ValueError("survival_scale must lie in (0, 1]")
    w = 1 / curve.stderr**2
    # the grid start guards against the regression landing in a poor basin
    starts = [_loglinear_guess(n, p, w, survival_scale), _grid_guess(n, p, w, survival_scale)]
    theta = min(starts, key=lambda th: float(np.sum(w * (p - rb_model(n, th[0], th[1], survival_scale)) ** 2)))
    theta, c, it = _gauss_newton(n, p, w, survival_scale, theta, max_iter, rtol)
    total = it
    for _ in range(reweight):
        w = 1 / _model_stderr(n, curve.shots, theta, survival_scale) ** 2
        new, c, it = _gauss_newton(n, p, w, survival_scale, theta, max_iter, rtol)
        total += it
        done = np.all(np.abs(new - theta) <= 1e-9 * np.maximum(np.abs(theta), 1e-6))
        theta = new
        if done:
            break
    jac = rb_jacobian(n, theta[0], theta[1], survival_scale)
    a = jac.T @ (w[:, None] * jac)
    try:
        cov = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular normal matrix") from exc
    return FitResult(
        d=float(theta[0]),
        d_spam=float(theta[1]),
        d_err=float(np.sqrt(cov[0, 0])),
        d_spam_err=float(np.sqrt(cov[1, 1])),
        cov=cov,
        chi2=c,
        survival_scale=survival_scale,
        iterations=total,
    )


def ramsey_model(t, t2star, freq, phase):
    t = np.asarray(t, dtype=float)
    return 0.5 + (coherence_alpha(t, t2star) - 0.5) * np.cos(2 * np.pi * freq * t + phase)


def fit_ramsey(t, p, detuning_hint: float, stderr=None) -> tuple[float, float]:
    """Fit a Ramsey fringe for ``T2*``; returns ``(T2*, stderr)``.

    ``detuning_hint`` is the programmed fringe frequency in Hz.
    """
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(t) < 6:
        raise FitError("need at least six Ramsey points")
    if detuning_hint * np.ptp(t) < 1:
        raise FitError("data must span at least one fringe")
    sig = np.ones_like(p) if stderr is None else np.maximum(np.asarray(stderr, float), 1e-6)

    def resid(x):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return (ramsey_model(t, np.exp(np.clip(x[0], -30, 30)), x[1], x[2]) - p) / sig

    best = None
    span = np.ptp(t) + t.max()
    for t2_guess in span * np.array([0.1, 0.3, 1.0, 3.0, 30.0]):
        for ph in (0.0, np.pi / 2, np.pi, -np.pi / 2):
            sol = least_squares(resid, [np.log(t2_guess), detuning_hint, ph], method="lm")
            if best is None or sol.cost < best.cost:
                best = sol
    if best is None or not best.success:
        raise FitError("Ramsey fit did not converge")
    t2 = float(np.exp(best.x[0]))
    jac = best.jac
    dof = max(len(p) - 3, 1)
    s2 = 2 * best.cost / dof if stderr is None else 1.0
    try:
        cov = np.linalg.inv(jac.T @ jac) * s2
        err = float(t2 * np.sqrt(max(cov[0, 0], 0.0)))
    except np.linalg.LinAlgError:
        err = float("inf")
    return t2, err


def rabi_model(t, freq, amplitude, damping):
    t = np.asarray(t, dtype=float)
    return 0.5 - 0.5 * amplitude * np.exp(-((t / damping) ** 2)) * np.cos(2 * np.pi * freq * t)


def fit_rabi(t, p, freq_hint: float) -> dict:
    """Fit an array-averaged Rabi flop; frequency in Hz."""
    t = np.asarray(t, float)
    p = np.asarray(p, float)

    def resid(x):
        return rabi_model(t, x[0], x[1], np.exp(x[2])) - p

    sol = least_squares(resid, [freq_hint, 1.0, np.log(10 * t.max())], method="lm")
    if not sol.success:
        raise FitError("Rabi fit did not converge")
    return {"freq": float(sol.x[0]), "amplitude": float(sol.x[1]), "damping": float(np.exp(sol.x[2]))}


@dataclass
class ArraySummary:
    n_sites: int
    fidelity_mean: float
    fidelity_std: float
    fidelity_sem: float
    fidelity_min: float
    fidelity_max: float
    spam_mean: float
    spam_std: float
    spam_min: float
    spam_max: float
    fidelity_hist: tuple[list[float], list[int]]
    spam_hist: tuple[list[float], list[int]]
    sites: list[dict]

    def as_dict(self) -> dict:
        return asdict(self)


def aggregate_array(results, labels=None, bins: int = 10) -> ArraySummary:
    """Array statistics of per-site fits.

    ``results`` is a sequence of :class:`FitResult`; ``labels`` optionally
    names each site (defaults to its position).
    """
    results = list(results)
    if not results:
        raise ValueError("no fit results to aggregate")
    labels = list(range(len(results))) if labels is None else list(labels)
    f = np.array([r.fidelity for r in results])
    s = np.array([r.d_spam for r in results])

    def hist(x):
        counts, edges = np.histogram(x, bins=bins)
        return edges.tolist(), counts.tolist()

    rows = []
    for lab, r in zip(labels, results):
        rows.append(
            {
                "site": lab,
                "d": r.d,
                "d_err": r.d_err,
                "d_spam": r.d_spam,
                "d_spam_err": r.d_spam_err,
                "fidelity": r.fidelity,
                "fidelity_err": r.fidelity_err,
                "chi2": r.chi2,
            }
        )
    n = len(results)
    return ArraySummary(
        n_sites=n,
        fidelity_mean=float(f.mean()),
        fidelity_std=float(f.std()),
        fidelity_sem=float(f.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
        fidelity_min=float(f.min()),
        fidelity_max=float(f.max()),
        spam_mean=float(s.mean()),
        spam_std=float(s.std()),
        spam_min=float(s.min()),
        spam_max=float(s.max()),
        fidelity_hist=hist(f),
        spam_hist=hist(s),
        sites=rows,
    )


FIT_COLUMNS = ["site", "d", "d_err", "d_spam", "d_spam_err", "fidelity", "fidelity_err", "chi2"]


def fits_to_csv(summary: ArraySummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIT_COLUMNS)
    for row in summary.sites:
        w.writerow([row["site"] if isinstance(row["site"], int) else str(row["site"])] + [repr(float(row[k])) for k in FIT_COLUMNS[1:]])
    return buf.getvalue()


def fits_to_json(summary: ArraySummary) -> str:
    return json.dumps(summary.as_dict(), indent=1, sort_keys=True)


def histogram_to_csv(summary: ArraySummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "bin_lo", "bin_hi", "count"])
    for name, (edges, counts) in (("fidelity", summary.fidelity_hist), ("spam", summary.spam_hist)):
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            w.writerow([name, repr(lo), repr(hi), c])
    return buf.getvalue()
