"""Vectorised Monte-Carlo of RB shots for many sites at once."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from atomrb.clifford import PhaseFrame, compile_gate, recovery_gate
from atomrb.pulses import expand_all
from atomrb.readout import DET0, DestructiveParams, NdroParams, analytic_summary, destructive_readout, ndro_shots
from atomrb.sites import COHERENT, EMPTY, SPECTATOR, SiteModel, detuning_scale

RB_STREAM = 1


class BatchPropagator:
    """Applies pulses to a batch of states with fixed per-state noise.

    Amplitude error and detuning are constant over a shot, so cosines and
    sines are cached per distinct pulse area.
    """

    def __init__(self, rabi_nominal: float, amplitude_error: np.ndarray, detuning: np.ndarray):
        self.rabi = rabi_nominal
        drive = rabi_nominal * (1 + np.asarray(amplitude_error, float))
        detuning = np.asarray(detuning, float)
        self.gen = np.hypot(drive, detuning)
        self.nt = np.divide(drive, self.gen, out=np.zeros_like(self.gen), where=self.gen > 0)
        self.nz = np.divide(detuning, self.gen, out=np.zeros_like(self.gen), where=self.gen > 0)
        self._cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def _coeffs(self, area: float):
        hit = self._cache.get(area)
        if hit is None:
            half = 0.5 * self.gen * (area / self.rabi)
            c, s = np.cos(half), np.sin(half)
            hit = (c - 1j * s * self.nz, -1j * s * self.nt)
            self._cache[area] = hit
        return hit

    def apply(self, c0, c1, pulses, n: int | None = None):
        """Evolve the first ``n`` states in place through ``pulses``."""
        k = len(c0) if n is None else n
        if k == 0:
            return
        a0, a1 = c0[:k], c1[:k]
        for p in pulses:
            diag, off = self._coeffs(p.area)
            diag, off = diag[:k], off[:k]
            e = np.exp(1j * p.phase)
            b0 = diag * a0 + (off * np.conj(e)) * a1
            a1[:] = (off * e) * a0 + np.conj(diag) * a1
            a0[:] = b0


@dataclass
class StringResult:
    """Counts for one gate string on every site: arrays of shape (sites, lengths)."""

    string_index: int
    successes: np.ndarray
    shots: np.ndarray


def site_stream(seed: int, site: int, string: int, tag: int = RB_STREAM) -> np.random.Generator:
    """Counter-style stream keyed by (experiment, site, string)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(tag, site, string))))


def simulate_string(
    string: list[int],
    string_index: int,
    sites: list[SiteModel],
    lengths: tuple[int, ...],
    shots: int,
    seed: int,
    rabi_nominal: float,
    bb1: bool = True,
    mode: str = "destructive",
    destructive: DestructiveParams = DestructiveParams(),
    ndro: NdroParams | None = None,
) -> StringResult:
    """Run every (site, length, shot) of one RB string.

    Atoms start in ``|1>``; the recovery gate returns the ideal state to
    ``|0>``, which is the F=3 state that survives the blow-away and stays
    dark under NDRO. The counted probability is ``P(|0>)``: among loaded
    atoms for destructive readout, among atoms seen in the verification
    image for NDRO.
    """
    lengths = tuple(int(x) for x in lengths)
    n_len = len(lengths)
    per_site = n_len * shots
    n_sites = len(sites)
    total = n_sites * per_site

    # -- per-shot randomness, drawn in a fixed order per (site, string)
    rngs = [site_stream(seed, s, string_index) for s in range(n_sites)]
    atom = np.empty(total, int)
    alive = np.empty(total, bool)
    delta = np.empty(total)
    u_proj = np.empty(total)
    eps = np.empty(total)
    for s, (site, rng) in enumerate(zip(sites, rngs)):
        sl = slice(s * per_site, (s + 1) * per_site)
        u = rng.random((3, per_site))
        loaded = u[0] < site.p_load
        pumped = u[1] < site.prep_fidelity
        atom[sl] = np.where(loaded, np.where(pumped, COHERENT, SPECTATOR), EMPTY)
        alive[sl] = u[2] < site.survival
        g = rng.standard_gamma(1.5, size=(2, per_site))
        delta[sl] = detuning_scale(site.t2star) * (g[0] - g[1]) + site.detuning_offset
        u_proj[sl] = rng.random(per_site)
        eps[sl] = site.rabi / rabi_nominal - 1
    length_of = np.tile(np.repeat(np.array(lengths), shots), n_sites)

    # -- coherent evolution of the atoms that matter, longest first
    evolve = np.flatnonzero((atom == COHERENT) & alive)
    order = evolve[np.argsort(-length_of[evolve], kind="stable")]
    len_sorted = length_of[order]
    prop = BatchPropagator(rabi_nominal, eps[order], delta[order])
    c0 = np.zeros(len(order), complex)
    c1 = np.ones(len(order), complex)
    p0 = np.zeros(total)

    checkpoints = sorted(set(lengths))
    max_len = max(checkpoints)
    # active[j] = number of states still running when gate j is applied
    n_active = np.searchsorted(-len_sorted, -np.arange(1, max_len + 1), side="right")

    frame = PhaseFrame()
    prefix = list(string[:max_len])
    if len(prefix) < max_len:
        raise ValueError("gate string shorter than the longest sequence length")

    def finish(n_gates: int):
        lo = np.searchsorted(-len_sorted, -n_gates, side="left")
        hi = np.searchsorted(-len_sorted, -n_gates, side="right")
        if hi == lo:
            return
        g = recovery_gate(prefix[:n_gates], initial=1, target=0)
        pulses, _ = compile_gate(g, frame, rabi_nominal)
        pulses = expand_all(pulses, bb1)
        sub0, sub1 = c0[lo:hi].copy(), c1[lo:hi].copy()
        sub_prop = _SliceView(prop, lo, hi)
        sub_prop.apply(sub0, sub1, pulses)
        norm = np.abs(sub0) ** 2 + np.abs(sub1) ** 2
        p0[order[lo:hi]] = np.abs(sub0) ** 2 / norm

    if 0 in checkpoints:
        finish(0)
    for j in range(max_len):
        pulses, frame = compile_gate(prefix[j], frame, rabi_nominal)
        prop.apply(c0, c1, expand_all(pulses, bb1), int(n_active[j]))
        if j + 1 in checkpoints:
            finish(j + 1)

    # -- projective measurement and readout
    state = np.where(atom == SPECTATOR, 2, np.where(u_proj < p0, 0, 1))
    successes = np.zeros((n_sites, n_len), int)
    counted = np.zeros((n_sites, n_len), int)
    if mode == "ndro":
        thr = analytic_summary(ndro)["threshold"]
    for s, rng in enumerate(rngs):
        sl = slice(s * per_site, (s + 1) * per_site)
        loaded = atom[sl] != EMPTY
        if mode == "destructive":
            det = destructive_readout(state[sl], alive[sl], rng, destructive)
            ok = (det == DET0) & loaded
            base = loaded
        else:
            out = ndro_shots(state[sl], ndro, rng, present=loaded & alive[sl])
            base = out.survived
            ok = base & (out.counts < thr)
        successes[s] = ok.reshape(n_len, shots).sum(axis=1)
        counted[s] = base.reshape(n_len, shots).sum(axis=1)
    return StringResult(string_index, successes, counted)


class _SliceView:
    """A :class:`BatchPropagator` restricted to rows ``lo:hi``."""

    def __init__(self, prop: BatchPropagator, lo: int, hi: int):
        self.prop, self.lo, self.hi = prop, lo, hi

    def apply(self, c0, c1, pulses):
        for p in pulses:
            diag, off = self.prop._coeffs(p.area)
            diag, off = diag[self.lo : self.hi], off[self.lo : self.hi]
            e = np.exp(1j * p.phase)
            b0 = diag * c0 + (off * np.conj(e)) * c1
            c1[:] = (off * e) * c0 + np.conj(diag) * c1
            c0[:] = b0
