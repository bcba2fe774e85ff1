"""Annihilating filters for clustered line spectra.

A filter of order M at center c is the M-th convolution power of
[1, -exp(i c h)]; applied to uniform samples it zeroes every moment of order
below M of spectral content at c, at the cost of amplifying bounded noise by
at most 2^M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class AnnihilatingFilter:
    center: float
    order: int
    step: float
    coefficients: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("filter order must be at least 1")
        m = self.order
        combs = np.array([math.comb(m, l) for l in range(m + 1)], dtype=float)
        phases = np.exp(1j * self.center * self.step * np.arange(m + 1))
        signs = (-1.0) ** np.arange(m + 1)
        object.__setattr__(self, "coefficients", combs * signs * phases)

    @property
    def l1_norm(self) -> float:
        """sum |c_l| = 2^order, exactly, since each coefficient has modulus C(M, l)."""
        return float(2**self.order)

    def apply(self, samples) -> np.ndarray:
        return afsr(samples, self.step, [self.center], [self.order])


@dataclass(frozen=True)
class ClusterModel:
    """(T, D, L)-clustered geometry: disjoint intervals around well-separated centers."""

    centers: np.ndarray
    half_lengths: np.ndarray
    max_count: int  # N0, most spectra in any one cluster
    cluster_gap: float | None = None  # L; derived from the centers when omitted
    orders: dict = field(default_factory=dict)  # explicit per-cluster filter orders
    counts: np.ndarray | None = None  # known per-cluster spectra counts

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim != 1 or centers.size < 1:
            raise ValueError("centers must be a nonempty 1-D sequence")
        if not np.all(np.diff(centers) > 0):
            raise ValueError("cluster centers must be strictly increasing")
        half = np.asarray(self.half_lengths, dtype=float)
        if half.ndim == 0:
            half = np.full(centers.size, float(half))
        if half.shape != centers.shape or np.any(half < 0):
            raise ValueError("half_lengths must be nonnegative, one per center")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "half_lengths", half)
        if self.max_count < 1:
            raise ValueError("max_count must be at least 1")
        if centers.size > 1:
            gaps = np.diff(centers)
            touching = gaps - (half[:-1] + half[1:])
            if np.any(touching <= 0):
                raise ValueError("cluster intervals must be pairwise disjoint")
            d = float(np.max(half))
            gap = self.cluster_gap if self.cluster_gap is not None else float(np.min(gaps)) - 2 * d
            if float(np.min(gaps)) < gap + 2 * d - 1e-9:
                raise ValueError(
                    f"minimum center gap {np.min(gaps):.6g} below L + 2D = {gap + 2 * d:.6g}"
                )
            object.__setattr__(self, "cluster_gap", gap)
        if self.counts is not None:
            counts = np.asarray(self.counts, dtype=int)
            if counts.shape != centers.shape or np.any(counts < 1):
                raise ValueError("counts must be positive, one per center")
            if np.any(counts > self.max_count):
                raise ValueError("a cluster count exceeds max_count")
            object.__setattr__(self, "counts", counts)

    @property
    def cluster_count(self) -> int:
        return self.centers.size


def default_orders(max_count: int) -> tuple[int, int]:
    """(nearest-interferer order, other order): (3, 2) for pairs, (5, 3) for triples.

    Generalized as (2 N0 - 1, N0), matching the recommended ranges at the
    cluster sizes they were stated for.
    """
    return max(1, 2 * max_count - 1), max(1, max_count)


def build_filter(center: float, order: int, step: float) -> AnnihilatingFilter:
    """Order-M annihilating filter at the given center, built for the given step."""
    return AnnihilatingFilter(center=center, order=order, step=step)


def compose(filters) -> AnnihilatingFilter:
    """Convolve filters into one composite; all must share the same step."""
    filters = list(filters)
    if not filters:
        raise ValueError("compose needs at least one filter")
    step = filters[0].step
    for f in filters[1:]:
        if abs(f.step - step) > 1e-12 * max(abs(step), 1.0):
            raise ValueError("cannot compose filters built for different steps")
    if len(filters) == 1:
        return filters[0]
    coeffs = filters[0].coefficients
    for f in filters[1:]:
        coeffs = np.convolve(coeffs, f.coefficients)
    composite = AnnihilatingFilter.__new__(AnnihilatingFilter)
    object.__setattr__(composite, "center", math.nan)
    object.__setattr__(composite, "order", sum(f.order for f in filters))
    object.__setattr__(composite, "step", step)
    object.__setattr__(composite, "coefficients", coeffs)
    return composite


def select_targets(all_centers, mu: float, r_tru: float, r_ess: float) -> np.ndarray:
    """Cluster centers whose offset from mu lies in the essential annulus.

    These are the interferers worth filtering: close enough to leak into the
    window (within R_ess) but not owned by it (outside the trust region).
    """
    if r_tru >= r_ess:
        raise ValueError("require r_tru < r_ess")
    centers = np.asarray(all_centers, dtype=float)
    offsets = np.abs(centers - mu)
    return centers[(offsets > r_tru) & (offsets <= r_ess)]


def sub2(samples, step: float, orders, max_count: int) -> tuple[np.ndarray, float]:
    """Subsample so about 2*N0 + |Q| samples survive the later filtering.

    F_sub = ceil(len / (2*N0 + sum(orders) + 1)); survivors are every
    F_sub-th sample from the first.
    """
    s = np.asarray(samples)
    total = 2 * max_count + int(sum(orders)) + 1
    if s.size < total:
        raise ValueError(
            f"{s.size} samples cannot support {max_count} sources through a "
            f"filter of length {int(sum(orders)) + 1} (need at least {total})"
        )
    factor = math.ceil(s.size / total)
    return s[::factor].copy(), step * factor


def afsr(samples, step: float, centers, orders, stride: int = 1) -> np.ndarray:
    """Annihilating-filter spectra removal: filter and trim boundary samples.

    Builds one filter per center at step*stride, composes, convolves, and
    keeps the slice past the filter length, so the output is shorter than the
    input by the composite coefficient count (times the stride). A stride
    above 1 places the filter taps on every stride-th input sample: the
    annihilation identity holds at the strided step while the full input rate
    is preserved in the output. No centers means identity.
    """
    s = np.asarray(samples, dtype=complex)
    centers = list(centers)
    orders = list(orders)
    if len(centers) != len(orders):
        raise ValueError("need one order per filter center")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    if not centers:
        return s.copy()
    composite = compose([build_filter(c, m, step * stride) for c, m in zip(centers, orders)])
    taps = composite.coefficients
    if stride > 1:
        spread = np.zeros((taps.size - 1) * stride + 1, dtype=complex)
        spread[::stride] = taps
        taps = spread
    if s.size <= taps.size + 1:
        raise ValueError(f"{s.size} samples too few for a filter of length {taps.size}")
    out = np.convolve(s, taps)[taps.size : s.size]
    if out.size < 3:
        raise ValueError(f"filtering leaves {out.size} samples; need at least 3")
    return out


def decay_bound(
    tv_norm_cluster: float, step: float, half_length: float, order: int, distance: float
) -> float:
    """Residual envelope of a filtered cluster at the given distance from it.

    (tv / pi) * (h D)^M * exp(h D) / distance: with h D << 1 the filter
    removes nearly all of the cluster's contribution.
    """
    if distance <= 0:
        raise ValueError("distance must be positive")
    hd = step * half_length
    return tv_norm_cluster / math.pi * hd**order * math.exp(hd) / distance
