"""MUSIC on uniform samples of exponential sums.

The samples fill a (near-)square Hankel matrix; the top singular subspace
spans the signal directions and positions are read off as peaks of the
noise-projection imaging functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SV_ABSOLUTE_FLOOR = 1e-14


@dataclass(frozen=True)
class MusicConfig:
    source_count: int | None = None  # known source number, if any
    sv_ratio_threshold: float | None = None  # None -> adaptive noise-based rule
    grid_density: int = 100  # test points per unit interval
    search_interval: tuple[float, float] = (-1.0, 1.0)
    peak_floor: float = 0.5  # discard maxima below this fraction of the global max
    source_cap: int | None = None  # upper bound applied to the estimated rank

    def __post_init__(self):
        if self.grid_density < 1:
            raise ValueError("grid_density must be at least 1")
        if not 0 < self.peak_floor < 1:
            raise ValueError("peak_floor must lie in (0, 1)")
        if self.search_interval[0] >= self.search_interval[1]:
            raise ValueError("search_interval must be nonempty")

    def locked(self, **changes) -> "MusicConfig":
        return replace(self, **changes)


@dataclass
class MusicResult:
    estimates: np.ndarray
    singular_values: np.ndarray
    functional: np.ndarray  # imaging functional sampled on the search grid
    grid: np.ndarray = field(default_factory=lambda: np.empty(0))
    rank: int = 0
    status: str = "ok"  # "ok" or "no signal"
    peak_values: np.ndarray = field(default_factory=lambda: np.empty(0))


def hankel(samples) -> np.ndarray:
    """p x q Hankel matrix H[r, c] = samples[r + c], p = ceil((m+1)/2)."""
    s = np.asarray(samples, dtype=complex)
    m = s.size
    if m < 3:
        raise ValueError("need at least 3 samples to form a Hankel matrix")
    p = (m + 2) // 2  # ceil((m + 1) / 2)
    q = m + 1 - p
    idx = np.arange(p)[:, None] + np.arange(q)[None, :]
    return s[idx]


def estimate_rank(singular_values, ratio: float) -> int:
    """Number of singular values at or above ratio * largest; 0 for all-zero."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    sv = np.asarray(singular_values, dtype=float)
    if sv.size == 0 or sv[0] <= 0:
        return 0
    return int(np.sum(sv >= ratio * sv[0]))


def _adaptive_threshold(sv: np.ndarray) -> float:
    """max(10 * noise floor estimate / top value, 1e-6).

    The noise floor is the median of the trailing half of the singular
    values, a robust scale when the matrix holds noise-dominated directions.
    """
    tail = sv[sv.size // 2 :]
    noise = float(np.median(tail)) if tail.size else 0.0
    return max(10.0 * noise / sv[0], 1e-6)


def _steering(grid: np.ndarray, step: float, p: int) -> np.ndarray:
    """Columns exp(i * x * a * step) for a = 0..p-1, one column per grid point."""
    return np.exp(1j * step * np.outer(np.arange(p), grid))


def _functional_on(points: np.ndarray, signal_basis: np.ndarray, step: float) -> np.ndarray:
    """J(x) = |phi(x)| / |(I - P) phi(x)| with unit-modulus steering entries."""
    p = signal_basis.shape[0]
    proj = signal_basis.conj().T @ _steering(points, step, p)
    residual = p - np.sum(np.abs(proj) ** 2, axis=0)
    return np.sqrt(p / np.maximum(residual, 1e-300))


def _refine_peak(
    x: float, halfwidth: float, signal_basis: np.ndarray, step: float, rounds: int = 3
) -> float:
    """Trisect the bracketing cell around a grid maximum a few times."""
    for _ in range(rounds):
        points = x + halfwidth * np.linspace(-1.0, 1.0, 7)
        values = _functional_on(points, signal_basis, step)
        x = float(points[int(np.argmax(values))])
        halfwidth /= 3.0
    return x


def music(samples, step: float, config: MusicConfig) -> MusicResult:
    """Locate spectral positions as peaks of the MUSIC imaging functional.

    The signal space is the span of the top-r left singular vectors of the
    Hankel matrix; r is the given source count or is estimated from the
    singular-value profile. Grid maxima at or above peak_floor of the global
    maximum are kept and refined by grid trisection.
    """
    s = np.asarray(samples, dtype=complex)
    # 2n complex samples carry the 2n real degrees of freedom of n spectra;
    # the filtered-cluster path runs at exactly this minimum
    if config.source_count is not None and s.size < 2 * config.source_count:
        raise ValueError(
            f"{s.size} samples cannot determine {config.source_count} sources "
            f"(need at least {2 * config.source_count})"
        )
    h = hankel(s)
    p = h.shape[0]
    u, sv, _ = np.linalg.svd(h, full_matrices=False)

    lo, hi = config.search_interval
    count = max(2, int(math.ceil((hi - lo) * config.grid_density)) + 1)
    grid = np.linspace(lo, hi, count)

    if sv[0] < SV_ABSOLUTE_FLOOR:
        return MusicResult(np.empty(0), sv, np.ones(grid.size), grid, 0, "no signal")

    if config.source_count is not None:
        rank = config.source_count
        if rank >= p:
            raise ValueError(f"source count {rank} >= Hankel height {p}: subspace degenerate")
    else:
        ratio = (
            config.sv_ratio_threshold
            if config.sv_ratio_threshold is not None
            else _adaptive_threshold(sv)
        )
        rank = estimate_rank(sv, ratio) if ratio < 1 else 0
        if config.source_cap is not None:
            rank = min(rank, config.source_cap)
        rank = min(rank, p - 1)  # keep at least one noise direction
    if rank == 0:
        return MusicResult(np.empty(0), sv, np.ones(grid.size), grid, 0, "no signal")

    basis = np.ascontiguousarray(u[:, :rank])
    values = _functional_on(grid, basis, step)
    floor = config.peak_floor * float(np.max(values))

    peaks = []
    for i in range(grid.size):
        left = values[i - 1] if i > 0 else -math.inf
        right = values[i + 1] if i + 1 < grid.size else -math.inf
        if values[i] > left and values[i] >= right and values[i] >= floor:
            peaks.append(i)

    cell = (hi - lo) / (count - 1)
    refined = sorted(_refine_peak(grid[i], cell, basis, step) for i in peaks)

    # twin grid maxima of one peak collapse to the same refined point; dedup
    estimates: list[float] = []
    for x in refined:
        if estimates and x - estimates[-1] < 0.5 * cell:
            estimates[-1] = 0.5 * (estimates[-1] + x)
        else:
            estimates.append(x)
    est = np.clip(np.asarray(estimates), lo, hi)
    heights = _functional_on(est, basis, step) if est.size else np.empty(0)
    return MusicResult(est, sv, values, grid, rank, "ok", heights)
