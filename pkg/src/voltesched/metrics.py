"""Throughput, fairness, outage and infeasibility statistics."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np


@dataclass
class RunMetrics:
    """Per-run aggregates; throughputs are bits per 20 ms frame."""

    volte_throughput_bits_per_frame: float
    data_throughput_bits_per_frame: float
    total_throughput: float
    jain_index: float
    outage_fraction: float | None  # None when there are no voice users
    infeasible: float = 0.0  # fraction of infeasible frames (frame_optimal)


def jain_index(rates) -> float:
    """(sum x)^2 / (K * sum x^2); 1 for equal rates, 1/K at the single-user extreme.

    All-zero rates are treated as perfectly fair (1.0).
    """
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0:
        raise ValueError("jain_index requires at least one rate")
    if np.any(rates < 0):
        raise ValueError("rates must be nonnegative")
    peak = float(rates.max())
    if peak == 0.0:
        return 1.0
    rates = rates / peak  # scale-invariant; avoids under/overflow in the squares
    sq = float((rates**2).sum())
    return float(rates.sum()) ** 2 / (rates.size * sq)


def outage_probability(served_per_frame, num_volte: int) -> float:
    """Mean over frames of the fraction of voice users left unserved."""
    if num_volte < 1:
        raise ValueError("outage is undefined without voice users")
    served = np.asarray(served_per_frame, dtype=float)
    if served.size == 0:
        raise ValueError("need at least one frame")
    if np.any(served > num_volte) or np.any(served < 0):
        raise ValueError("served counts out of range")
    return float(np.mean((num_volte - served) / num_volte))


def aggregate_runs(runs: list[RunMetrics]) -> dict[str, tuple[float, float]]:
    """Per-field unweighted mean and sample standard deviation.

    Fields that are None in every run (outage with no voice users) are
    reported as (nan, nan).
    """
    if not runs:
        raise ValueError("need at least one run")
    out = {}
    for f in fields(RunMetrics):
        vals = [getattr(r, f.name) for r in runs]
        vals = [v for v in vals if v is not None]
        if not vals:
            out[f.name] = (float("nan"), float("nan"))
            continue
        arr = np.asarray(vals, dtype=float)
        mean = float(arr.mean())
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        out[f.name] = (mean, std)
    return out


def bits_per_frame_to_kbps(bits: float) -> float:
    """A 20 ms frame holds bits/0.02 bit/s = bits * 0.05 kbit/s."""
    return bits * 0.05
