"""Centralization and Gaussian windowing of band-limited Fourier samples.

Modulating by exp(-i*mu*w) moves spectral content near mu to the origin;
convolving with a truncated, normalized Gaussian then damps content at
distance x from mu by exp(-x^2 / 4 lambda). Windowing trades bandwidth for
locality: only frequencies inside the effective cutoff remain trustworthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .model import SampledMeasurement
from .special import SQRT_PI, phi

# direct summation below this |Y|*|window| product, FFT above
FFT_PRODUCT_THRESHOLD = 4_000_000

CUTOFF_OK = "ok"
CUTOFF_NO_LOSS = "no_loss"  # threshold already met at epsilon -> 0
CUTOFF_USELESS = "useless"  # threshold unreachable on (0, 1)


def gaussian_window(lam: float, omega: float) -> float:
    """Normalized Gaussian kernel sqrt(lam/pi) * exp(-lam * omega^2)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return math.sqrt(lam / math.pi) * math.exp(-lam * omega * omega)


def regions(lam: float, trust_level: float, essential_level: float) -> tuple[float, float]:
    """Trust and essential radii: the superlevel radii of exp(-x^2 / 4 lam).

    Closed-form inverse R = sqrt(4 lam ln(1/kappa)); equivalent to scanning a
    grid of the window profile but with no grid step or scan bound to pick.
    """
    if not 0 < essential_level < trust_level < 1:
        raise ValueError("levels must satisfy 0 < essential_level < trust_level < 1")
    return superlevel_radius(lam, trust_level), superlevel_radius(lam, essential_level)


def superlevel_radius(lam: float, level: float) -> float:
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if not 0 < level <= 1:
        raise ValueError("level must lie in (0, 1]")
    return math.sqrt(4.0 * lam * math.log(1.0 / level))


def window_loss(lam: float, omega: float, epsilon: float) -> float:
    """H(eps) = phi(-sqrt(lam) eps omega) + phi(sqrt(lam)(-2 + eps) omega)."""
    s = math.sqrt(lam)
    return phi(-s * epsilon * omega) + phi(s * (-2.0 + epsilon) * omega)


def model_error_bound(lam: float, omega: float, epsilon: float, tv_norm: float) -> float:
    """Band-limitation error bound (tv / sqrt(pi)) * H(epsilon).

    Valid for frequencies |w| <= (1 - epsilon) * omega.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return tv_norm / SQRT_PI * window_loss(lam, omega, epsilon)


def effective_cutoff(
    lam: float, omega: float, tv_norm: float, sigma: float, tol: float = 1e-10
) -> tuple[float, str]:
    """Largest band on which the band-limitation error stays below sigma.

    Returns (omega_win, status). omega_win = omega * (1 - eps*) where eps* is
    the infimum of eps in (0,1) with H(eps) < sqrt(pi) * sigma / tv_norm,
    located by bisection on the strictly decreasing H. Unreachable thresholds
    are flagged rather than silently clamped: status "no_loss" returns omega
    (threshold met already at eps -> 0), "useless" returns 0.
    """
    if sigma <= 0 or tv_norm <= 0:
        raise ValueError("sigma and tv_norm must be positive")
    threshold = SQRT_PI * sigma / tv_norm
    if window_loss(lam, omega, 0.0) < threshold:
        return omega, CUTOFF_NO_LOSS
    if window_loss(lam, omega, 1.0) >= threshold:
        return 0.0, CUTOFF_USELESS
    lo, hi = 0.0, 1.0  # H(lo) >= threshold > H(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if window_loss(lam, omega, mid) < threshold:
            hi = mid
        else:
            lo = mid
    return omega * (1.0 - hi), CUTOFF_OK


@dataclass(frozen=True)
class WindowPlan:
    """One centralization + windowing pass: parameters and derived geometry."""

    lam: float
    mu: float
    gamma: float
    trust_level: float
    essential_level: float
    step: float
    trunc_index: int  # Gamma: window truncated at |j| <= Gamma grid steps
    trust_radius: float
    essential_radius: float
    omega_win: float
    cutoff_status: str

    @classmethod
    def for_measurement(
        cls,
        measurement: SampledMeasurement,
        lam: float,
        mu: float,
        gamma: float,
        trust_level: float,
        essential_level: float,
        tv_norm: float | None = None,
    ) -> "WindowPlan":
        """Derive Gamma, the trust/essential radii, and the effective cutoff.

        tv_norm feeds the effective-cutoff computation; when unknown it is
        estimated from the data as max |Y|, which matches the true TV norm up
        to the noise level at the coherent frequency.
        """
        if not 0 < gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        r_tru, r_ess = regions(lam, trust_level, essential_level)
        h = measurement.step
        k = measurement.cutoff_index
        trunc = _truncation_index(lam, gamma, h)
        if trunc > k:
            raise ValueError(
                f"truncation index {trunc} exceeds K = {k}: window wider than data "
                f"(raise gamma or lambda, or sample a wider band)"
            )
        sigma = measurement.noise_level
        if sigma > 0:
            tv = tv_norm if tv_norm is not None else float(np.max(np.abs(measurement.samples)))
            omega_win, status = effective_cutoff(lam, measurement.omega, tv, sigma)
            if status == CUTOFF_USELESS:
                omega_win = measurement.omega  # keep downstream radii finite
        else:
            omega_win, status = measurement.omega, CUTOFF_NO_LOSS
        return cls(
            lam=lam,
            mu=mu,
            gamma=gamma,
            trust_level=trust_level,
            essential_level=essential_level,
            step=h,
            trunc_index=trunc,
            trust_radius=r_tru,
            essential_radius=r_ess,
            omega_win=omega_win,
            cutoff_status=status,
        )

    def weights(self) -> np.ndarray:
        """Discrete window h * G_lam(j*h) for j = -Gamma..Gamma."""
        j = np.arange(-self.trunc_index, self.trunc_index + 1)
        x = j * self.step
        return self.step * math.sqrt(self.lam / math.pi) * np.exp(-self.lam * x * x)

    @property
    def window_mass(self) -> float:
        """Total discrete window weight; tends to 1 as h -> 0."""
        return float(np.sum(self.weights()))

    def with_center(self, mu: float) -> "WindowPlan":
        from dataclasses import replace

        return replace(self, mu=mu)


@dataclass(frozen=True)
class WindowedMeasurement:
    """Windowed samples on the grid start_frequency + i*step."""

    samples: np.ndarray
    step: float
    plan: WindowPlan
    start_frequency: float = 0.0


def _truncation_index(lam: float, gamma: float, h: float) -> int:
    """Smallest s >= 1 with exp(-lam (s h)^2) <= gamma, robust to rounding."""
    s = max(1, math.ceil(math.sqrt(math.log(1.0 / gamma) / lam) / h))
    while s > 1 and math.exp(-lam * ((s - 1) * h) ** 2) <= gamma:
        s -= 1
    while math.exp(-lam * (s * h) ** 2) > gamma:
        s += 1
    return s


def centralize(measurement: SampledMeasurement, mu: float) -> np.ndarray:
    """Modulate Y by exp(-i mu w_k); moduli are unchanged."""
    return measurement.samples * np.exp(-1j * mu * measurement.frequencies)


def convolve_valid(samples: np.ndarray, weights: np.ndarray, method: str = "auto") -> np.ndarray:
    """Valid-mode convolution, direct for small products and FFT for large."""
    if method == "auto":
        method = "fft" if samples.size * weights.size > FFT_PRODUCT_THRESHOLD else "direct"
    if method == "direct":
        return np.convolve(samples, weights, mode="valid")
    if method == "fft":
        return fftconvolve(samples, weights, mode="valid")
    raise ValueError(f"unknown convolution method {method!r}")


def cgm(
    measurement: SampledMeasurement, plan: WindowPlan, method: str = "auto", mode: str = "valid"
) -> WindowedMeasurement:
    """Centralize at plan.mu and window: Y_win = (Y_cen * G)[middle part].

    In "valid" mode only the interior of the discrete convolution is kept to
    avoid boundary effects, so the output has 2K - 2*Gamma + 1 entries.

    "extended" mode keeps the zero-padded convolution out to the effective
    cutoff when that reaches past the valid interior: the band-limitation
    error of those extra samples stays below the noise level by the defining
    property of the effective cutoff, and the widened output is worth real
    resolution when the window truncation is deep (large Gamma).
    """
    k = measurement.cutoff_index
    h = measurement.step
    if plan.trunc_index > k:
        raise ValueError(f"truncation index {plan.trunc_index} exceeds K = {k}")
    if abs(plan.step - h) > 1e-12 * h:
        raise ValueError("plan was built for a different sampling step")
    centered = centralize(measurement, plan.mu)
    if mode == "valid":
        windowed = convolve_valid(centered, plan.weights(), method=method)
        return WindowedMeasurement(windowed, h, plan, -(k - plan.trunc_index) * h)
    if mode != "extended":
        raise ValueError(f"unknown cgm mode {mode!r}")
    valid_edge = (k - plan.trunc_index) * h
    keep = valid_edge
    if plan.cutoff_status == CUTOFF_OK:
        keep = max(valid_edge, plan.omega_win)
    b = int(math.floor(keep / h + 1e-9))
    full = fftconvolve(centered, plan.weights(), mode="full")
    mid = k + plan.trunc_index  # index of frequency 0 in the full convolution
    windowed = full[mid - b : mid + b + 1]
    return WindowedMeasurement(windowed, h, plan, -b * h)
