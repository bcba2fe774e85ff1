"""SCAN-MUSIC: sweep a Gaussian window over the spectral domain, run MUSIC
per window on subsampled data, and merge the per-window estimates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import SampledMeasurement, StageTimer
from .subspace import MusicConfig, music
from .windowing import WindowPlan, cgm


@dataclass(frozen=True)
class ScanConfig:
    lam: float = 100.0
    gamma: float = 1e-3
    trust_level: float = 0.95
    essential_level: float = 1e-3
    sweep_interval: tuple[float, float] = (-1.0, 1.0)
    subsample_factor: int | str = "auto"  # integer >= 1 or "auto"
    density_prior: float | None = None  # spectra per Rayleigh length, for "auto"
    music: MusicConfig = field(default_factory=MusicConfig)
    merge_radius: float | None = None  # None -> pi / (8 * omega_win)
    tv_norm: float | None = None  # known TV norm for the effective cutoff

    def __post_init__(self):
        if self.sweep_interval[0] >= self.sweep_interval[1]:
            raise ValueError("sweep_interval must be nonempty")
        if isinstance(self.subsample_factor, str):
            if self.subsample_factor != "auto":
                raise ValueError("subsample_factor must be an integer >= 1 or 'auto'")
        elif self.subsample_factor < 1:
            raise ValueError("subsample_factor must be an integer >= 1 or 'auto'")


def sub1(samples, step: float, factor: int) -> tuple[np.ndarray, float]:
    """Keep every factor-th sample starting from the first; step grows by factor.

    The survivor count is floor(len / factor); at least 3 samples must remain.
    """
    if factor < 1:
        raise ValueError("subsampling factor must be at least 1")
    s = np.asarray(samples)
    count = s.size // factor
    if count < 3:
        raise ValueError(
            f"subsampling by {factor} leaves {count} of {s.size} samples; need at least 3"
        )
    return s[: count * factor : factor].copy(), step * factor


def auto_subsample_factor(win_length: int, r_ess: float, rho: float, step: float) -> int:
    """Density-guided factor min(|Y_win| / (4 R_ess rho), pi / (R_ess h)), floored.

    The first term keeps roughly twice as many samples as spectra expected in
    the essential region; the second keeps the subsampled grid alias-free on
    that region.
    """
    if rho <= 0 or r_ess <= 0:
        raise ValueError("rho and r_ess must be positive")
    raw = min(win_length / (4.0 * r_ess * rho), math.pi / (r_ess * step))
    return max(1, math.floor(raw))


def downsample_tau(measurement: SampledMeasurement, tau: float) -> SampledMeasurement:
    """Restrict samples to the sub-band |w| <= tau * omega; step unchanged.

    Trades resolution (Rayleigh limit grows to pi / (tau omega)) for fewer
    samples; appropriate in super-sparse regimes.
    """
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    k = measurement.cutoff_index
    kept = math.floor(tau * k)
    if 2 * kept + 1 < 3:
        raise ValueError(f"tau = {tau} keeps {2 * kept + 1} samples; need at least 3")
    mid = k  # index of w = 0
    return SampledMeasurement(
        samples=measurement.samples[mid - kept : mid + kept + 1].copy(),
        omega=kept * measurement.step,
        step=measurement.step,
        noise_level=measurement.noise_level,
        seed=measurement.seed,
        noise_mode=measurement.noise_mode,
    )


def center_grid(r1: float, r2: float, trust_radius: float) -> tuple[np.ndarray, float]:
    """Window centers tiling [r1, r2] with cells no wider than one trust region.

    Returns (centers, cell halfwidth). The sweep interval is split into
    ceil((r2-r1) / (2 r_tru)) equal half-open cells so the union of trust
    regions covers the interval exactly once for any interval length; when
    the length is an exact multiple of 2 r_tru this is the stride-2*r_tru
    grid from r1 + r_tru to r2 - r_tru.
    """
    span = r2 - r1
    if span < 2 * trust_radius:
        warnings.warn(
            f"sweep interval of length {span:.3g} is narrower than one trust cell "
            f"({2 * trust_radius:.3g}); using a single window at the midpoint",
            stacklevel=2,
        )
        return np.array([0.5 * (r1 + r2)]), 0.5 * span
    cells = math.ceil(span / (2.0 * trust_radius))
    width = span / cells
    centers = r1 + width * (np.arange(cells) + 0.5)
    return centers, 0.5 * width


def merge_estimates(values: np.ndarray, radius: float) -> np.ndarray:
    """Collapse single-linkage chains of estimates closer than radius to means."""
    if values.size == 0:
        return values
    ordered = np.sort(values)
    merged = []
    start = 0
    for i in range(1, ordered.size + 1):
        if i == ordered.size or ordered[i] - ordered[i - 1] >= radius:
            merged.append(float(np.mean(ordered[start:i])))
            start = i
    return np.asarray(merged)


def scan_music(
    measurement: SampledMeasurement, config: ScanConfig, timer: StageTimer | None = None
) -> np.ndarray:
    """Reconstruct all line spectra inside the sweep interval.

    For each window center: centralize + Gaussian-window the data, subsample,
    run MUSIC over the trust region, keep the estimates the window owns (its
    half-open cell), and shift them back by the center. Estimates from all
    windows are concatenated, sorted, and near-duplicates merged.
    """
    timer = timer if timer is not None else StageTimer()
    r1, r2 = config.sweep_interval
    plan0 = WindowPlan.for_measurement(
        measurement,
        lam=config.lam,
        mu=0.0,
        gamma=config.gamma,
        trust_level=config.trust_level,
        essential_level=config.essential_level,
        tv_norm=config.tv_norm,
    )
    centers, cell_halfwidth = center_grid(r1, r2, plan0.trust_radius)

    collected: list[np.ndarray] = []
    for mu in centers:
        with timer.span("window"):
            windowed = cgm(measurement, plan0.with_center(mu))
        with timer.span("subsample"):
            factor = config.subsample_factor
            if factor == "auto":
                if config.density_prior is None:
                    raise ValueError("subsample_factor 'auto' requires density_prior")
                factor = auto_subsample_factor(
                    windowed.samples.size,
                    plan0.essential_radius,
                    config.density_prior,
                    measurement.step,
                )
            sub_samples, sub_step = sub1(windowed.samples, measurement.step, factor)
        with timer.span("music"):
            cap = None
            if config.density_prior is not None:
                cap = math.ceil(2 * plan0.essential_radius * config.density_prior) + 2
            local_cfg = config.music.locked(
                search_interval=(-plan0.trust_radius, plan0.trust_radius),
                source_cap=cap if config.music.source_cap is None else config.music.source_cap,
            )
            result = music(sub_samples, sub_step, local_cfg)
        owned = result.estimates + mu
        owned = owned[(owned >= mu - cell_halfwidth) & (owned < mu + cell_halfwidth)]
        collected.append(owned)

    with timer.span("merge"):
        pooled = np.sort(np.concatenate(collected)) if collected else np.empty(0)
        radius = config.merge_radius
        if radius is None:
            radius = math.pi / (8.0 * plan0.omega_win)
        merged = merge_estimates(pooled, radius)
    return merged
