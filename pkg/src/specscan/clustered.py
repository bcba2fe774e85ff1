"""SCAN-MUSIC(C): per-cluster windows with annihilating-filter interference
removal, plus cluster-center detection by clustering a coarse scan.
"""

from __future__ import annotations

import math

import numpy as np

from .annihilator import ClusterModel, afsr, default_orders, select_targets
from .model import SampledMeasurement, StageTimer
from .scan import ScanConfig, merge_estimates, scan_music, sub1
from .subspace import MusicConfig, music
from .windowing import WindowPlan, cgm

# zero-placement target for each interferer's filter: the stride is chosen so
# the interferer sits about this many radians from the filter's passband
FILTER_PHASE_TARGET = 1.0
# interferers windowed-damped less than this get the elevated order; the
# nearest one on each side is always elevated
ELEVATION_DAMPING = 0.05
# samples handed to the per-cluster MUSIC after filtering
MUSIC_SAMPLE_BUDGET = 60
# extra subspace dimensions tried when MUSIC under-resolves a cluster
MAX_RANK_ESCALATION = 8
# successful ranks pooled into the final per-cluster estimate
RANK_VOTES = 3
# polyphase branches of the filtered sequence voting on the estimate
BRANCH_VOTES = 3
# relative peak floor inside a filtered window, where peak heights are uneven
CLUSTER_PEAK_FLOOR = 0.02


def detect_centers(
    measurement: SampledMeasurement,
    config: ScanConfig,
    merge_radius: float | None = None,
    timer: StageTimer | None = None,
) -> np.ndarray:
    """Estimate cluster centers: scan, then average estimates within a Rayleigh length.

    Runs scan_music and single-linkage-clusters its output with the given
    linkage threshold (default one Rayleigh length pi/omega), returning each
    cluster's arithmetic mean in increasing order.
    """
    if merge_radius is None:
        merge_radius = math.pi / measurement.omega
    if merge_radius <= 0:
        raise ValueError("merge_radius must be positive")
    estimates = scan_music(measurement, config, timer=timer)
    return merge_estimates(estimates, merge_radius)


def _assign_orders(
    targets: np.ndarray, mu: float, clusters: ClusterModel, lam: float
) -> list[int]:
    """Per-target filter orders, strongest on the interferers that matter most.

    An interferer gets the elevated order when it survives the window at
    weight >= ELEVATION_DAMPING (strong leakage) and the base order otherwise;
    the nearest one on each side is always elevated. Explicit per-cluster
    orders in the model override the policy.
    """
    elevated, base = default_orders(clusters.max_count)
    center_index = {float(c): i for i, c in enumerate(clusters.centers)}
    nearest: dict[float, float] = {}
    for side in (-1.0, 1.0):
        offsets = [float(c - mu) for c in targets if (c - mu) * side > 0]
        if offsets:
            nearest[side] = min(offsets, key=abs)
    orders = []
    for c in targets:
        idx = center_index[float(c)]
        offset = float(c - mu)
        if idx in clusters.orders:
            orders.append(int(clusters.orders[idx]))
        elif offset in nearest.values() or math.exp(-(offset**2) / (4 * lam)) >= ELEVATION_DAMPING:
            orders.append(elevated)
        else:
            orders.append(base)
    return orders


def _filter_interference(
    samples: np.ndarray, step: float, offsets, orders, phase_target: float
) -> np.ndarray | None:
    """Annihilate each interferer with its own strided filter.

    The stride puts the interferer roughly phase_target radians from the
    filter passband, keeping the filter's gain on the trust region healthy
    while the zero still cancels the interferer exactly.
    """
    out = samples
    for offset, order in zip(offsets, orders):
        stride = max(1, round(phase_target / (step * abs(offset))))
        if out.size <= order * stride + 7:
            return None
        out = afsr(out, step, [offset], [order], stride=stride)
    return out


def scan_music_c(
    measurement: SampledMeasurement,
    config: ScanConfig,
    clusters: ClusterModel,
    timer: StageTimer | None = None,
) -> np.ndarray:
    """Reconstruct clustered line spectra, one window per cluster center.

    Per center: centralize + window (keeping the band out to the effective
    cutoff), annihilate the interfering clusters in the essential annulus
    with per-interferer strided filters, subsample the filtered data, and run
    MUSIC over the trust region. When MUSIC yields fewer trust-region peaks
    than the cluster holds, the subspace rank is escalated a few steps: the
    extra dimensions absorb filtering residue that would otherwise hide the
    weakest source direction.
    """
    timer = timer if timer is not None else StageTimer()
    plan0 = WindowPlan.for_measurement(
        measurement,
        lam=config.lam,
        mu=0.0,
        gamma=config.gamma,
        trust_level=config.trust_level,
        essential_level=config.essential_level,
        tv_norm=config.tv_norm,
    )
    oversize = clusters.half_lengths > plan0.trust_radius
    if np.any(oversize):
        worst = float(np.max(clusters.half_lengths))
        raise ValueError(
            f"cluster half-length {worst:.4g} exceeds the trust radius "
            f"{plan0.trust_radius:.4g}; lower trust_level or raise lambda until "
            f"the trust region covers every cluster"
        )

    collected: list[np.ndarray] = []
    for t, mu in enumerate(clusters.centers):
        with timer.span("window"):
            windowed = cgm(measurement, plan0.with_center(mu), mode="extended")
        with timer.span("filter"):
            targets = select_targets(
                clusters.centers, mu, plan0.trust_radius, plan0.essential_radius
            )
            orders = _assign_orders(targets, mu, clusters, config.lam)
            # interferers sit at their offsets from mu in the centralized data
            filtered = _filter_interference(
                windowed.samples, measurement.step, targets - mu, orders, FILTER_PHASE_TARGET
            )
            if filtered is None:
                raise ValueError(
                    f"window at {mu:.4g} is too short for the interference filters; "
                    f"lower gamma or the filter orders"
                )
            budget = max(MUSIC_SAMPLE_BUDGET, 2 * clusters.max_count + int(sum(orders)) + 1)
            factor = max(1, filtered.size // budget)
            sub_samples, sub_step = sub1(filtered, measurement.step, factor)
        with timer.span("music"):
            if clusters.counts is not None:
                wanted = int(clusters.counts[t])
            else:
                probe = music(
                    sub_samples,
                    sub_step,
                    config.music.locked(
                        search_interval=(-plan0.trust_radius, plan0.trust_radius),
                        source_count=None,
                        source_cap=clusters.max_count,
                    ),
                )
                wanted = max(1, min(probe.rank, clusters.max_count))
            # vote across a few polyphase branches of the filtered sequence;
            # each sees the same tones against differently rotated residue
            branch_results = []
            for branch in range(min(BRANCH_VOTES, factor)):
                branch_samples = filtered[branch:]
                sub_b, step_b = sub1(branch_samples, measurement.step, factor)
                sub_b = sub_b[: sub_samples.size]
                est_b = _resolve_cluster(
                    sub_b, step_b, plan0.trust_radius, wanted, config.music
                )
                if est_b.size == wanted:
                    branch_results.append(est_b)
            if branch_results:
                estimates = np.median(np.vstack(branch_results), axis=0)
            else:
                estimates = _resolve_cluster(
                    sub_samples, sub_step, plan0.trust_radius, wanted, config.music
                )
        collected.append(estimates + mu)

    with timer.span("merge"):
        pooled = np.sort(np.concatenate(collected)) if collected else np.empty(0)
        radius = config.merge_radius
        if radius is None:
            radius = math.pi / (8.0 * plan0.omega_win)
        merged = merge_estimates(pooled, radius)
    return merged


def _resolve_cluster(
    samples: np.ndarray,
    step: float,
    trust_radius: float,
    wanted: int,
    base_config: MusicConfig,
) -> np.ndarray:
    """MUSIC with rank escalation until `wanted` trust-region peaks appear.

    Peak heights in a filtered window vary over orders of magnitude, so the
    relative floor is kept low and the `wanted` tallest peaks are taken, as
    for a known source count.
    """
    p = (samples.size + 2) // 2
    best = np.empty(0)
    top = min(wanted + MAX_RANK_ESCALATION, p - 1)
    resolved: list[np.ndarray] = []
    for rank in range(wanted, top + 1):
        cfg = base_config.locked(
            search_interval=(-trust_radius, trust_radius),
            source_count=rank,
            source_cap=None,
            peak_floor=CLUSTER_PEAK_FLOOR,
        )
        result = music(samples, step, cfg)
        inside = np.abs(result.estimates) <= trust_radius
        estimates = result.estimates[inside]
        if estimates.size >= wanted:
            tallest = np.argsort(result.peak_values[inside])[-wanted:]
            resolved.append(np.sort(estimates[tallest]))
            if len(resolved) == RANK_VOTES:
                break
        elif estimates.size > best.size:
            best = estimates
    if resolved:
        # the same peak set recurs across workable ranks; the member-wise
        # median damps the rank-specific rotation of the weakest direction
        return np.median(np.vstack(resolved), axis=0)
    return best
