"""Ground-truth line spectra, Fourier-domain synthesis, and estimate scoring.

A spectrum is a discrete measure sum_j a_j * delta_{y_j}; a measurement is its
band-limited Fourier data on a uniform frequency grid plus bounded noise.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NOISE_MODES = ("disk", "clipped_gaussian")


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Discrete measure with strictly increasing positions and nonzero amplitudes."""

    positions: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if pos.ndim != 1 or pos.size < 1:
            raise ValueError("positions must be a nonempty 1-D sequence")
        if amp.shape != pos.shape:
            raise ValueError("positions and amplitudes must have equal length")
        if pos.size > 1 and not np.all(np.diff(pos) > 0):
            raise ValueError("positions must be strictly increasing (no ties)")
        if np.any(np.abs(amp) == 0):
            raise ValueError("amplitudes must all be nonzero")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def count(self) -> int:
        return self.positions.size

    @property
    def m_min(self) -> float:
        """Smallest amplitude modulus."""
        return float(np.min(np.abs(self.amplitudes)))

    @property
    def d_min(self) -> float:
        """Smallest pairwise separation; +inf for a single spectrum."""
        if self.count < 2:
            return math.inf
        return float(np.min(np.diff(self.positions)))

    @property
    def tv_norm(self) -> float:
        """Total variation norm, sum of amplitude moduli."""
        return float(np.sum(np.abs(self.amplitudes)))

    @property
    def support_halfwidth(self) -> float:
        return float(np.max(np.abs(self.positions)))

    def shifted(self, offset: float) -> "DiscreteSpectrum":
        return DiscreteSpectrum(self.positions + offset, self.amplitudes.copy())


@dataclass(frozen=True)
class SampledMeasurement:
    """Uniform Fourier samples Y(w_k), w_k = k*h for k = -K..K, with |noise| < sigma."""

    samples: np.ndarray
    omega: float
    step: float
    noise_level: float
    seed: int
    noise_mode: str = "disk"

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", arr)
        if self.omega <= 0 or self.step <= 0:
            raise ValueError("omega and step must be positive")
        k = _grid_count(self.omega, self.step)
        if arr.size != 2 * k + 1:
            raise ValueError(
                f"samples length {arr.size} inconsistent with 2K+1 = {2 * k + 1} "
                f"for omega={self.omega}, step={self.step}"
            )
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}")

    @property
    def sample_count(self) -> int:
        return self.samples.size

    @property
    def cutoff_index(self) -> int:
        """K, the one-sided index count."""
        return (self.samples.size - 1) // 2

    @property
    def frequencies(self) -> np.ndarray:
        k = self.cutoff_index
        return np.arange(-k, k + 1) * self.step


@dataclass
class EstimateReport:
    """Estimate list scored against a ground truth by greedy nearest matching."""

    estimates: np.ndarray
    matched_error: np.ndarray  # per true spectrum; NaN where missed
    rms_error: float
    missed: int
    spurious: int
    timings: dict = field(default_factory=dict)

    @property
    def matched(self) -> int:
        return int(np.sum(np.isfinite(self.matched_error)))

    @property
    def max_matched_error(self) -> float:
        errs = self.matched_error[np.isfinite(self.matched_error)]
        return float(np.max(errs)) if errs.size else math.nan


def _grid_count(omega: float, step: float) -> int:
    """K = omega/step, required to be an integer up to rounding."""
    ratio = omega / step
    k = round(ratio)
    if k < 1 or abs(ratio - k) > 1e-8 * max(1.0, ratio):
        raise ValueError(f"omega/step = {ratio} is not within rounding of an integer >= 1")
    return k


def _draw_noise(count: int, sigma: float, seed: int, mode: str) -> np.ndarray:
    """Noise with |W| < sigma strictly; PCG64 keyed by the 64-bit seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    if mode == "disk":
        radius = sigma * rng.random(count)
        # uniform on the disk of that radius
        r = radius * np.sqrt(rng.random(count))
        theta = 2.0 * np.pi * rng.random(count)
        return r * np.exp(1j * theta)
    if mode == "clipped_gaussian":
        w = (rng.normal(size=count) + 1j * rng.normal(size=count)) * (sigma / 3.0)
        mag = np.abs(w)
        cap = sigma * (1.0 - 1e-12)
        over = mag >= cap
        if np.any(over):
            w[over] *= cap / mag[over]
        return w
    raise ValueError(f"unknown noise mode {mode!r}")


def synthesize(
    spectrum: DiscreteSpectrum,
    omega: float,
    step: float,
    noise_level: float = 0.0,
    seed: int = 0,
    noise_mode: str = "disk",
) -> SampledMeasurement:
    """Sample Y(w_k) = sum_j a_j exp(i y_j w_k) + W(w_k) on w_k = k*step, |k| <= K.

    The step must satisfy the Nyquist-Shannon criterion step <= pi/max|y_j|.
    Noise is deterministic given the seed and bounded strictly by noise_level.
    """
    k = _grid_count(omega, step)
    r = spectrum.support_halfwidth
    if r > 0 and step > math.pi / r * (1 + 1e-12):
        raise ValueError(
            f"step {step} violates Nyquist criterion: maximum admissible step is "
            f"pi/R = {math.pi / r:.6g} for support halfwidth R = {r:.6g}"
        )
    freqs = np.arange(-k, k + 1) * step
    clean = np.exp(1j * np.outer(freqs, spectrum.positions)) @ spectrum.amplitudes
    if noise_level > 0:
        clean = clean + _draw_noise(freqs.size, noise_level, seed, noise_mode)
    return SampledMeasurement(clean, omega, step, noise_level, seed, noise_mode)


def density(spectrum: DiscreteSpectrum, support_halfwidth: float, omega: float) -> float:
    """Average number of spectra per Rayleigh length: (n / 2R) * (pi / omega)."""
    if support_halfwidth <= 0 or omega <= 0:
        raise ValueError("support_halfwidth and omega must be positive")
    if support_halfwidth < spectrum.support_halfwidth * (1 - 1e-12):
        raise ValueError("support_halfwidth smaller than the spectrum's actual support")
    return spectrum.count / (2.0 * support_halfwidth) * (math.pi / omega)


def match_and_score(
    truth: DiscreteSpectrum,
    estimates,
    omega: float | None = None,
    radius: float | None = None,
    timings: dict | None = None,
) -> EstimateReport:
    """Greedy nearest-neighbor matching of sorted estimates to sorted truth.

    A pair counts as matched when |y - yhat| < radius; the default radius is
    half a Rayleigh length, pi/(2*omega). The RMS error is computed over matched
    pairs only; missed and spurious counts are reported separately.
    """
    if radius is None:
        if omega is None or omega <= 0:
            raise ValueError("either omega > 0 or an explicit radius is required")
        radius = math.pi / (2.0 * omega)
    est = np.sort(np.asarray(estimates, dtype=float))
    true_pos = truth.positions
    n = true_pos.size
    errors = np.full(n, math.nan)
    used = np.zeros(est.size, dtype=bool)
    ei = 0
    for ti in range(n):
        t = true_pos[ti]
        while ei + 1 < est.size and abs(est[ei + 1] - t) <= abs(est[ei] - t):
            ei += 1
        if ei < est.size and abs(est[ei] - t) < radius:
            errors[ti] = abs(est[ei] - t)
            used[ei] = True
            ei += 1
    matched = int(np.sum(np.isfinite(errors)))
    missed = n - matched
    spurious = est.size - matched
    if matched:
        finite = errors[np.isfinite(errors)]
        rms = float(np.sqrt(np.sum(finite**2) / matched))
    else:
        rms = math.nan
    return EstimateReport(
        estimates=est,
        matched_error=errors,
        rms_error=rms,
        missed=missed,
        spurious=spurious,
        timings=dict(timings or {}),
    )


def load_spectrum(path) -> DiscreteSpectrum:
    """Read a spectrum file: one `y re(a) im(a)` line per component, # comments."""
    positions, amplitudes = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected `y re(a) im(a)`, got {raw!r}")
        positions.append(float(parts[0]))
        amplitudes.append(complex(float(parts[1]), float(parts[2])))
    order = np.argsort(positions)
    return DiscreteSpectrum(np.asarray(positions)[order], np.asarray(amplitudes)[order])


def save_spectrum(spectrum: DiscreteSpectrum, path) -> None:
    lines = ["# y re(a) im(a)"]
    for y, a in zip(spectrum.positions, spectrum.amplitudes):
        lines.append(f"{y!r} {a.real!r} {a.imag!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def save_measurement(measurement: SampledMeasurement, path) -> None:
    """JSON dump with samples as [re, im] pairs."""
    payload = {
        "omega": measurement.omega,
        "step": measurement.step,
        "sigma": measurement.noise_level,
        "seed": measurement.seed,
        "samples": [[z.real, z.imag] for z in measurement.samples],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True))


def load_measurement(path) -> SampledMeasurement:
    payload = json.loads(Path(path).read_text())
    samples = np.array([complex(re, im) for re, im in payload["samples"]])
    return SampledMeasurement(
        samples=samples,
        omega=float(payload["omega"]),
        step=float(payload["step"]),
        noise_level=float(payload["sigma"]),
        seed=int(payload["seed"]),
    )


class StageTimer:
    """Accumulates wall-clock seconds per pipeline stage on a monotonic clock."""

    def __init__(self):
        self.timings: dict[str, float] = {}

    def add(self, stage: str, seconds: float) -> None:
        self.timings[stage] = self.timings.get(stage, 0.0) + seconds

    class _Span:
        def __init__(self, timer, stage):
            self.timer, self.stage = timer, stage

        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.timer.add(self.stage, time.perf_counter() - self.t0)
            return False

    def span(self, stage: str) -> "_Span":
        return StageTimer._Span(self, stage)
