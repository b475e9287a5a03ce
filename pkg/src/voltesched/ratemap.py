"""CQI/MCS rate map: SINR -> CQI -> bits carried per PRB.

The table below is the standard 15-entry CQI table for a 10% block error
rate target, plus the CQI-0 "no transmission" sentinel.  Every deliverable
bit count used by the schedulers comes from this module.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

# Usable resource elements per PRB per TTI after reference-signal overhead.
RES_PER_PRB = 120

# Air-interface bits per voice packet (speech payload + RLC/MAC overhead),
# delivered in exactly one TTI of each 20 ms frame.
VOICE_PACKET_BITS = 300
# AMR-WB 12.65 speech payload per 20 ms packet.
VOICE_PAYLOAD_BITS = 253


@dataclass(frozen=True)
class McsEntry:
    """One row of the CQI table."""

    cqi: int
    modulation_order: int  # bits per symbol: 2 (QPSK), 4 (16QAM), 6 (64QAM)
    code_rate_x1024: int
    beta: float  # carried for completeness; unused by the schedulers
    sinr_threshold_db: float


# (cqi, Qm, code rate x1024, beta, SINR switching threshold in dB).
# CQI 0 is the no-transmission sentinel; its threshold is -inf so that any
# SINR below the CQI-1 threshold maps to it.
_TABLE_ROWS = [
    (0, 0, 0, 0.0, -math.inf),
    (1, 2, 78, 1.00, -9.478),
    (2, 2, 120, 1.40, -6.658),
    (3, 2, 193, 1.40, -4.098),
    (4, 2, 308, 1.48, -1.798),
    (5, 2, 449, 1.50, 0.399),
    (6, 2, 602, 1.62, 2.424),
    (7, 4, 378, 3.10, 4.489),
    (8, 4, 490, 4.32, 6.367),
    (9, 4, 616, 5.37, 8.456),
    (10, 6, 466, 7.71, 10.266),
    (11, 6, 567, 15.5, 12.218),
    (12, 6, 666, 19.6, 14.122),
    (13, 6, 772, 24.7, 15.849),
    (14, 6, 873, 27.6, 17.786),
    (15, 6, 948, 28.0, 19.809),
]

MCS_TABLE: tuple[McsEntry, ...] = tuple(McsEntry(*row) for row in _TABLE_ROWS)

# Thresholds of the transmitting entries (CQI 1..15), used for the
# searchsorted-based vectorized lookup.
_THRESHOLDS_DB = np.array([e.sinr_threshold_db for e in MCS_TABLE[1:]])

# bits_per_prb(cqi) precomputed for cqi = 0..15.
BITS_PER_PRB = np.array(
    [(RES_PER_PRB * e.modulation_order * e.code_rate_x1024) // 1024 for e in MCS_TABLE],
    dtype=np.int64,
)


def cqi_from_sinr(sinr_db: float) -> int:
    """Largest CQI whose switching threshold is <= sinr_db (0 if below CQI 1).

    The comparison is inclusive: an SINR exactly at a threshold maps to that
    row's CQI.
    """
    if not math.isfinite(sinr_db):
        raise ValueError(f"SINR must be finite, got {sinr_db!r}")
    return int(np.searchsorted(_THRESHOLDS_DB, sinr_db, side="right"))


def cqi_from_sinr_array(sinr_db: np.ndarray) -> np.ndarray:
    """Vectorized cqi_from_sinr."""
    sinr_db = np.asarray(sinr_db)
    if not np.all(np.isfinite(sinr_db)):
        raise ValueError("SINR values must be finite")
    return np.searchsorted(_THRESHOLDS_DB, sinr_db, side="right")


def bits_per_prb(cqi: int) -> int:
    """Data bits one PRB carries in one TTI at the given CQI.

    floor(120 * Qm * rate/1024); 0 for CQI 0.  Reproduces the worked values
    666 / 177 / 18 bits for CQI 15 / 7 / 1.
    """
    _check_cqi(cqi)
    return int(BITS_PER_PRB[cqi])


def prbs_for_voice_packet(cqi: int) -> int | None:
    """PRBs needed to deliver one 300-bit voice packet; None if unservable (CQI 0)."""
    _check_cqi(cqi)
    if cqi == 0:
        return None
    return -(-VOICE_PACKET_BITS // bits_per_prb(cqi))


def _check_cqi(cqi: int) -> None:
    if not (0 <= int(cqi) <= 15) or int(cqi) != cqi:
        raise ValueError(f"CQI must be an integer in 0..15, got {cqi!r}")


def export_table_csv(path) -> None:
    """Write the CQI table (including the CQI-0 sentinel) as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cqi", "modulation_order", "code_rate_x1024", "beta", "sinr_threshold_db"])
        for e in MCS_TABLE:
            writer.writerow([e.cqi, e.modulation_order, e.code_rate_x1024, e.beta, e.sinr_threshold_db])
