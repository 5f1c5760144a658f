"""Failure-mode detectors over simulated trajectories.

Every detector is a pure function of a `Trajectory` and `DetectorThresholds`
and returns a `FailureDiagnosis`; `FailureKind.NONE` means nothing was found.
"""
import math
import warnings
from typing import Any, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ValidationError
from .modules import (DetectorThresholds, FailureDiagnosis, FailureKind, KIND_ORDER,
                      SalienceState, Scenario, Trajectory)
from .utils import weights_entropy

# monotonicity tolerance
MONOTONE_TOL = 1e-12
DRIFT_NOISE_TOL = 1e-6
ENTROPY_TOL = 1e-6


def normalized_entropy(state: Union[SalienceState, Sequence[float]]) -> float:
    """Shannon entropy of a weight distribution divided by ln K.

    Raises
    ------
    ValidationError
        If the weights are negative or do not sum to 1 (within 1e-9).
    """
    weights = state.weights if isinstance(state, SalienceState) else np.asarray(state, dtype=np.float64)
    if weights.ndim != 1 or weights.size == 0:
        raise ValidationError("weights must be a non-empty vector")
    if np.any(weights < 0) or abs(weights.sum() - 1.) > 1e-9:
        raise ValidationError(f"weights do not form a distribution: {weights.tolist()}")
    return weights_entropy(weights)


def _thresholds(th):
    return DetectorThresholds() if th is None else th


def _require_records(traj):
    if len(traj) == 0:
        raise ValidationError(f"trajectory {traj.scenario_id} is empty")


def _runs(mask):
    """Yield (start, stop) of every run of True values."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[::2], edges[1::2]))


def detect_howlround(traj: Trajectory, th: Optional[DetectorThresholds] = None) -> FailureDiagnosis:
    """Lock-in of one repeatedly chosen channel.

    A channel is locked in while its weight exceeds `howlround_w` and it is the
    chosen output. Such a run counts once it holds `howlround_window`
    consecutive non-decreasing steps; the onset is the first step of the run.
    """
    th = _thresholds(th)
    _require_records(traj)
    weights = traj.weights_matrix()
    chosen = traj.chosen()
    best = None
    for c in range(traj.k):
        column = weights[:, c]
        locked = (column > th.howlround_w) & (chosen == c)
        for start, stop in _runs(locked):
            segment = column[start:stop]
            streak, longest = 1, 1
            for prev, cur in zip(segment[:-1], segment[1:]):
                streak = streak + 1 if cur >= prev - MONOTONE_TOL else 1
                longest = max(longest, streak)
            if longest >= th.howlround_window:
                if best is None or start < best[0]:
                    best = (int(start), c, float(segment.max()), int(stop - start))
                break
    if best is None:
        return FailureDiagnosis.healthy()
    onset, channel, peak, run_length = best
    return FailureDiagnosis(FailureKind.HOWLROUND, onset,
                            {"channel": channel, "peak_w_max": peak, "run_length": run_length})


def detect_salience_collapse(traj: Trajectory, th: Optional[DetectorThresholds] = None) -> FailureDiagnosis:
    """All weights equalised so no output can resolve.

    Confirmed at the first step t where steps t - howlround_window .. t all
    have normalized entropy >= `collapse_entropy` and the leading channel is
    tied (top-two gap < `tie_tolerance`) or changes among them.
    """
    th = _thresholds(th)
    _require_records(traj)
    weights = traj.weights_matrix()
    entropy = traj.entropy()
    ordered = np.sort(weights, axis=1)
    gap = ordered[:, -1] - ordered[:, -2]
    leader = np.argmax(weights, axis=1)
    high = entropy >= th.collapse_entropy
    window = th.howlround_window
    for t in range(window, len(traj)):
        span = slice(t - window, t + 1)
        if not high[span].all():
            continue
        if (gap[span] < th.tie_tolerance).any() or np.any(leader[span] != leader[t - window]):
            return FailureDiagnosis(FailureKind.SALIENCE_COLLAPSE, t,
                                    {"entropy": float(entropy[t]), "min_gap": float(gap[span].min())})
    return FailureDiagnosis.healthy()


def detect_recursive_entrapment(traj: Trajectory, th: Optional[DetectorThresholds] = None) -> FailureDiagnosis:
    """A loop of revisited states.

    States are hashed as weights rounded to `cycle_quantization` plus the
    chosen output. A block of period p >= 2 repeating `cycle_repeats` times in
    a row, visiting at least two distinct weight vectors and with no entropy
    decrease between repetitions, is a loop. A fixed point is not.
    """
    th = _thresholds(th)
    _require_records(traj)
    quantized = np.rint(traj.weights_matrix() / th.cycle_quantization).astype(np.int64)
    keys = np.column_stack([quantized, traj.chosen()])
    entropy = traj.entropy()
    n = len(traj)
    repeats = th.cycle_repeats
    for t in range(n):
        for period in range(2, th.max_cycle_length + 1):
            stop = t + repeats * period
            if stop > n:
                break
            if not np.any(quantized[t + 1:t + period] != quantized[t]):
                continue
            if not np.array_equal(keys[t:stop - period], keys[t + period:stop]):
                continue
            visits = entropy[t:stop:period]
            if np.any(visits < entropy[t] - ENTROPY_TOL):
                continue
            count = repeats
            block = keys[t:t + period]
            while t + (count + 1) * period <= n and np.array_equal(
                    keys[t + count * period:t + (count + 1) * period], block):
                count += 1
            return FailureDiagnosis(FailureKind.RECURSIVE_ENTRAPMENT, t,
                                    {"cycle_length": period, "repeats": count})
    return FailureDiagnosis.healthy()


def detect_hyperfixation(traj: Trajectory,
                         task_channel: int,
                         resolution_channel: int,
                         decision_threshold: float,
                         th: Optional[DetectorThresholds] = None) -> FailureDiagnosis:
    """Persistent work on a task whose resolution never becomes salient.

    Detected when, for `drift_window` consecutive steps, the task weight is
    above `decision_threshold` and the resolution weight below it.
    """
    th = _thresholds(th)
    _require_records(traj)
    for name, channel in (("task_channel", task_channel), ("resolution_channel", resolution_channel)):
        if not 0 <= channel < traj.k:
            raise ValidationError(f"{name} {channel} is outside [0, {traj.k})")
    if task_channel == resolution_channel:
        raise ValidationError("task_channel and resolution_channel must differ")
    weights = traj.weights_matrix()
    stuck = (weights[:, task_channel] > decision_threshold) & (weights[:, resolution_channel] < decision_threshold)
    for start, stop in _runs(stuck):
        if stop - start >= th.drift_window:
            return FailureDiagnosis(FailureKind.ANALYTICAL_HYPERFIXATION, int(start), {
                "run_length": int(stop - start),
                "task_weight_min": float(weights[start:stop, task_channel].min()),
                "resolution_weight_max": float(weights[start:stop, resolution_channel].max()),
            })
    return FailureDiagnosis.healthy()


def detect_overconfidence(traj: Trajectory,
                          reliability: Sequence[float],
                          th: Optional[DetectorThresholds] = None) -> FailureDiagnosis:
    """Final salience out of proportion to a channel's reliability.

    The channel with the largest |final weight - reliability| is reported when
    that gap exceeds `confidence_gap`. `direction` is +1 for overweighting and
    -1 for starvation.
    """
    th = _thresholds(th)
    _require_records(traj)
    reliability = np.asarray(reliability, dtype=np.float64)
    if reliability.shape != (traj.k,):
        raise ValidationError(f"reliability has {reliability.size} entries, expected {traj.k}")
    weights = traj.weights_matrix()
    gaps = weights[-1] - reliability
    channel = int(np.argmax(np.abs(gaps)))
    if not abs(gaps[channel]) > th.confidence_gap:
        return FailureDiagnosis.healthy()
    exceeding = np.abs(weights[:, channel] - reliability[channel]) > th.confidence_gap
    within = np.flatnonzero(~exceeding)
    onset = int(within[-1] + 1) if within.size else 0
    return FailureDiagnosis(FailureKind.SALIENTARY_OVERCONFIDENCE, onset, {
        "channel": channel,
        "gap": float(abs(gaps[channel])),
        "direction": 1. if gaps[channel] > 0 else -1.,
        "final_weight": float(weights[-1, channel]),
        "reliability": float(reliability[channel]),
    })


def detect_rbse(traj: Trajectory, th: Optional[DetectorThresholds] = None) -> FailureDiagnosis:
    """System-wide escalation of biased salience.

    Looks for a window of `drift_window` steps over which the total-variation
    distance from the initial weights grows monotonically by at least
    `drift_min_growth`, ending with at least half of the channels moved and
    no channel holding more than `localization_ratio` of the positive drift.
    The last condition separates it from single-channel lock-in.
    """
    th = _thresholds(th)
    window = th.drift_window
    if len(traj) <= window:
        raise ValidationError(
            f"trajectory has {len(traj)} steps, RBSE detection needs more than {window}")
    weights = traj.weights_matrix()
    delta = weights - traj.initial
    distance = 0.5 * np.abs(delta).sum(axis=1)
    drops = np.concatenate(([0], np.cumsum(np.diff(distance) < -DRIFT_NOISE_TOL)))
    needed = math.ceil(traj.k / 2)
    for start in range(len(traj) - window + 1):
        end = start + window - 1
        if drops[end] != drops[start]:
            continue
        if distance[end] - distance[start] < th.drift_min_growth:
            continue
        affected = int(np.sum(np.abs(delta[end]) > th.drift_channel_tolerance))
        if affected < needed:
            continue
        positive = np.clip(delta[end], 0., None)
        if not positive.sum() > 0:
            continue
        localization = float(positive.max() / positive.sum())
        if localization > th.localization_ratio:
            continue
        return FailureDiagnosis(FailureKind.RBSE, start, {
            "drift_distance": float(distance[end]),
            "affected_channels": affected,
            "localization": localization,
        })
    return FailureDiagnosis.healthy()


def _meta_value(meta, traj, name):
    if isinstance(meta, Scenario):
        value = getattr(meta, name)
    elif isinstance(meta, Mapping):
        value = meta.get(name)
    else:
        value = None
    return traj.meta.get(name) if value is None else value


def diagnose(traj: Trajectory,
             scenario_meta: Optional[Union[Scenario, Mapping[str, Any]]] = None,
             th: Optional[DetectorThresholds] = None) -> List[FailureDiagnosis]:
    """Run every applicable detector.

    Parameters
    ----------
    traj
        Trajectory to examine.

    scenario_meta, optional
        A `Scenario` or a mapping with `reliability`, `task_channel`,
        `resolution_channel` and `decision_threshold`. Missing facts fall back
        to `traj.meta`; detectors whose facts are unknown are skipped.

    th, optional
        Detector thresholds.

    Returns
    -------
    list of FailureDiagnosis
        Positive diagnoses ordered by onset step; empty when healthy.
    """
    th = _thresholds(th)
    if len(traj) == 0:
        warnings.warn(f"trajectory {traj.scenario_id} is empty; nothing to diagnose",
                      category=RuntimeWarning)
        return []
    found = [detect_howlround(traj, th), detect_recursive_entrapment(traj, th)]
    if traj.normalized:
        found.append(detect_salience_collapse(traj, th))
    task = _meta_value(scenario_meta, traj, "task_channel")
    resolution = _meta_value(scenario_meta, traj, "resolution_channel")
    threshold = _meta_value(scenario_meta, traj, "decision_threshold")
    if task is not None and resolution is not None:
        found.append(detect_hyperfixation(traj, task, resolution,
                                          0.5 if threshold is None else threshold, th))
    reliability = _meta_value(scenario_meta, traj, "reliability")
    if reliability is not None:
        found.append(detect_overconfidence(traj, reliability, th))
    if len(traj) > th.drift_window:
        found.append(detect_rbse(traj, th))
    found = [d for d in found if d.detected]
    return sorted(found, key=lambda d: (d.onset_step, KIND_ORDER.index(d.kind)))


def diagnosis_frame(diagnoses: Sequence[FailureDiagnosis]) -> pd.DataFrame:
    """Long-format report: one `kind, onset, metric, value` row per metric.

    A healthy result is a single `None` row with empty onset and metric.
    """
    rows = []
    for diagnosis in diagnoses:
        for metric, value in diagnosis.metrics.items():
            rows.append((str(diagnosis.kind), diagnosis.onset_step, metric, value))
    if not rows:
        rows.append((str(FailureKind.NONE), None, None, None))
    frame = pd.DataFrame(rows, columns=["kind", "onset", "metric", "value"])
    frame["onset"] = frame["onset"].astype("Int64")
    frame["value"] = frame["value"].astype(np.float64)
    return frame


def summarize(diagnoses: Sequence[FailureDiagnosis], scenario_id: Optional[str] = None) -> str:
    """Human-readable report of a diagnosis list."""
    header = f"Diagnosis for {scenario_id}" if scenario_id else "Diagnosis"
    lines = [header, "=" * len(header)]
    if not diagnoses:
        lines.append("healthy: no failure mode detected")
    for diagnosis in diagnoses:
        lines.append(f"{diagnosis.kind} (onset step {diagnosis.onset_step})")
        for metric, value in diagnosis.metrics.items():
            lines.append(f"    {metric}: {value:.6g}")
    return "\n".join(lines) + "\n"
