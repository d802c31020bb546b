"""Weight-trajectory analysis: PCA, attractor diagnostics, and spread.

PCA is covariance PCA over the step-indexed snapshot matrix: the per-dimension
temporal mean is subtracted and no variance scaling is applied (all snapshot
dimensions share units; scaling would distort cycle geometry). Component signs
are fixed by making each component's largest-magnitude entry positive so
results reproduce across runs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .traces import EpisodeTrace
from .walker import run_episode, zero_contact_filter

# Attractor-classifier thresholds, validated on synthetic traces.
TRANSIENT_FRACTION = 0.2
RECURRENCE_MIN_CORR = 0.8
BOUNDED_RANGE_RATIO = 2.0
DECAY_RATIO = 0.1
DRIFT_DIRECTEDNESS = 0.5
FLAT_VARIANCE = 1e-12


@dataclass
class PCAResult:
    components: np.ndarray        # (q, dims), orthonormal rows
    variance_ratios: np.ndarray   # (q,), descending
    scores: np.ndarray            # (steps, q)
    degenerate: bool = False
    total_variance: float = 0.0


def _snapshot_matrix(trace):
    if isinstance(trace, EpisodeTrace):
        return trace.snapshots
    return np.asarray(trace, dtype=np.float64)


def pca(trace, q):
    """Principal components of a snapshot trajectory.

    Accepts an EpisodeTrace (uses its snapshots) or a raw (steps, dims)
    matrix. A constant trajectory is flagged degenerate: zero variance
    ratios, canonical basis components, zero scores.
    """
    x = _snapshot_matrix(trace)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InputError("pca needs a (steps >= 2, dims) snapshot matrix")
    steps, dims = x.shape
    q = int(q)
    if q < 1 or q > min(steps, dims):
        raise InputError(f"q={q} out of range for a {steps}x{dims} trajectory")
    centered = x - x.mean(axis=0)
    total = float((centered**2).sum() / steps)
    if total < FLAT_VARIANCE:
        return PCAResult(
            components=np.eye(dims)[:q],
            variance_ratios=np.zeros(q),
            scores=np.zeros((steps, q)),
            degenerate=True,
            total_variance=total,
        )
    _, singulars, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:q].copy()
    # sign convention: largest-magnitude entry of each component is positive
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    scores = centered @ components.T
    ratios = (singulars[:q] ** 2) / float((singulars**2).sum())
    return PCAResult(
        components=components,
        variance_ratios=ratios,
        scores=scores,
        degenerate=False,
        total_variance=total,
    )


def _autocorr_peak(z):
    """Best interior local maximum of the unbiased vector autocorrelation."""
    zc = z - z.mean(axis=0)
    n = zc.shape[0]
    denom = float((zc**2).sum()) / n
    if denom <= 0.0:
        return 0.0, 0
    max_lag = n // 2
    corr = np.empty(max_lag + 1)
    corr[0] = 1.0
    for lag in range(1, max_lag + 1):
        corr[lag] = float((zc[:-lag] * zc[lag:]).sum()) / (n - lag) / denom
    best_corr, best_lag = 0.0, 0
    for lag in range(2, max_lag):
        if corr[lag] > corr[lag - 1] and corr[lag] >= corr[lag + 1] and corr[lag] > best_corr:
            best_corr, best_lag = float(corr[lag]), lag
    return best_corr, best_lag


def attractor_class(pca_result, window=None):
    """Classify the top-2 PC trajectory as one of
    'limit_cycle' | 'fixed_point' | 'drift' | 'flat'.

    The first 20% of steps are discarded as transient. A trajectory is a
    limit cycle when it is recurrent (interior autocorrelation peak at lag
    >= 2 above 0.8) and bounded (late-window score range within 2x the early
    window); a fixed point when per-step displacement decays below 10% of the
    early window while drifting directedly toward a point; drift when
    displacement persists without recurrence; flat when there is essentially
    no variance.
    """
    traj = pca_result.scores[:, : min(2, pca_result.scores.shape[1])]
    start = int(TRANSIENT_FRACTION * traj.shape[0])
    z = traj[start:]
    n = z.shape[0]
    if window is None:
        window = max(2, n // 4)
    window = int(window)
    if n < 2 * window or n < 4:
        raise InputError(f"trajectory too short ({n} steps) for window {window}")

    if pca_result.degenerate or float(z.var(axis=0).sum()) < FLAT_VARIANCE:
        return "flat"

    disp = np.linalg.norm(np.diff(z, axis=0), axis=1)
    early_disp = float(disp[:window].mean())
    late_disp = float(disp[-window:].mean())
    early_range = float(np.max(z[:window].max(axis=0) - z[:window].min(axis=0)))
    late_range = float(np.max(z[-window:].max(axis=0) - z[-window:].min(axis=0)))

    peak_corr, _ = _autocorr_peak(z)
    bounded = late_range <= BOUNDED_RANGE_RATIO * max(early_range, 1e-30)
    if peak_corr > RECURRENCE_MIN_CORR and bounded:
        return "limit_cycle"

    decayed = late_disp < DECAY_RATIO * max(early_disp, 1e-30)
    path = float(disp.sum())
    net = float(np.linalg.norm(z[-1] - z[0]))
    directed = path > 0.0 and (net / path) > DRIFT_DIRECTEDNESS
    if decayed and directed:
        return "fixed_point"
    return "drift"


def pc_spread(pca_result, component, skip=100):
    """Population standard deviation of one component's scores after `skip` steps."""
    scores = pca_result.scores
    if component < 0 or component >= scores.shape[1]:
        raise InputError(f"component {component} out of range (q={scores.shape[1]})")
    if skip < 0 or skip >= scores.shape[0]:
        raise InputError(f"skip={skip} leaves no scores (steps={scores.shape[0]})")
    return float(np.std(scores[skip:, component]))


@dataclass
class GateReport:
    """Action-oscillation amplitudes with normal vs zeroed contact inputs."""

    normal_amplitude: float
    lifted_amplitude: float
    normal_per_joint: np.ndarray
    lifted_per_joint: np.ndarray


def _oscillation_amplitude(actions, tail=100):
    window = actions[-min(tail, actions.shape[0]):]
    per_joint = window.max(axis=0) - window.min(axis=0)
    return float(per_joint.mean()), per_joint


def oscillation_gate_test(policy, config, terrain, damage, seed=0, tail=100):
    """Compare action oscillation with real vs zeroed ('lifted') contact inputs.

    Purely descriptive: runs two episodes from the same seed and reports the
    mean per-joint peak-to-peak amplitude over the last `tail` steps of each.
    """
    _, normal = run_episode(policy, config, terrain, damage, seed=seed, capture=True)
    _, lifted = run_episode(
        policy, config, terrain, damage, seed=seed, capture=True,
        obs_filter=zero_contact_filter(config),
    )
    normal_amp, normal_joints = _oscillation_amplitude(normal.actions, tail)
    lifted_amp, lifted_joints = _oscillation_amplitude(lifted.actions, tail)
    return GateReport(normal_amp, lifted_amp, normal_joints, lifted_joints)
