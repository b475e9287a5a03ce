"""Monte-Carlo experiment driver: seeded runs, master CSV, plot-data slices."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import channel, metrics, sched
from .config import ExperimentConfig

CSV_COLUMNS = [
    "policy",
    "bandwidth_mhz",
    "N",
    "U",
    "K",
    "seed",
    "volte_kbps",
    "data_kbps",
    "total_kbps",
    "jain",
    "outage",
    "infeasible",
]

PLOT_FAMILIES = ("throughput_vs_u", "outage_vs_u", "fairness_vs_u", "infeasibility_vs_u")


class SizeCapError(RuntimeError):
    """An exact policy was requested beyond its configured variable cap."""


def run_seed(master_seed: int, num_volte: int, run_index: int) -> np.random.SeedSequence:
    """Documented per-run seed mixing: entropy = (master, U, run index).

    Runs are individually reproducible and statistically independent, and a
    given (U, run) pair sees the same channel under every policy, so policy
    comparisons are paired.
    """
    return np.random.SeedSequence([int(master_seed), int(num_volte), int(run_index)])


def check_size_caps(cfg: ExperimentConfig, policy: str, num_volte: int) -> None:
    """Refuse exact-solver instances beyond the configured variable caps.

    frame_optimal is counted after the constant-channel TTI symmetry
    reduction (min(T, U) modelled TTIs); the TTI-level cap uses the
    worst-case first-TTI program.
    """
    n, k, t = cfg.num_prb, cfg.num_data, sched.FRAME_TTIS
    if policy == "frame_optimal":
        t_eff = min(t, num_volte)
        nvars = n * (num_volte + k) * t_eff + num_volte * t_eff
        if nvars > cfg.frame_var_cap:
            raise SizeCapError(
                f"frame_optimal with N={n}, U={num_volte}, K={k} needs {nvars} binary "
                f"variables, above the frame-level cap of {cfg.frame_var_cap} "
                f"(raise frame_var_cap to override)"
            )
    elif policy in ("tti_optimal", "tti_optimal_pf"):
        nvars = max(n * num_volte + num_volte, n * (min(num_volte, n) + k))
        if nvars > cfg.tti_var_cap:
            raise SizeCapError(
                f"{policy} with N={n}, U={num_volte}, K={k} needs up to {nvars} binary "
                f"variables per TTI, above the TTI-level cap of {cfg.tti_var_cap} "
                f"(raise tti_var_cap to override)"
            )


@dataclass
class RunResult:
    metrics: metrics.RunMetrics
    data_user_bits: np.ndarray  # per-user totals over the run
    c_volte: int
    c_data: int
    ops: int


def simulate_run(
    cfg: ExperimentConfig, policy: str, num_volte: int, run_index: int
) -> RunResult:
    """One seeded run: cfg.frames frames over freshly drawn channels."""
    ss = run_seed(cfg.seed, num_volte, run_index)
    frame_seeds = ss.spawn(cfg.frames)
    radio = channel.RadioParams(tx_power=cfg.tx_power, noise_power=cfg.noise_power)

    k = cfg.num_data
    pf_avg = np.ones(k)
    served_per_frame = []
    infeasible_frames = 0
    c_volte = 0
    c_data = 0
    ops = 0
    data_user_bits = np.zeros(k, dtype=np.int64)

    per_tti = cfg.per_tti_fading and policy != "frame_optimal"
    for fs in frame_seeds:
        B = channel.build_scenario_bits(
            fs,
            num_volte,
            k,
            cfg.num_prb,
            radio=radio,
            cell_radius_m=cfg.cell_radius_m,
            pathloss_exponent=cfg.pathloss_exponent,
            num_tti=sched.FRAME_TTIS if per_tti else None,
        )
        alloc, state = sched.run_frame(
            B,
            num_volte,
            k,
            policy,
            gamma=cfg.gamma,
            pf_averages_in=pf_avg,
            time_limit=cfg.time_limit,
            strict_pseudocode=cfg.strict_pseudocode,
        )
        pf_avg = state.pf_avg
        if state.frame_status == "infeasible":
            infeasible_frames += 1
            served_per_frame.append(0)
            continue
        served_per_frame.append(num_volte - len(state.remaining_volte))
        c_volte += state.c_volte
        c_data += state.c_data
        ops += state.ops
        if alloc is not None and k > 0:
            data_user_bits += alloc.user_bits[num_volte:]

    outage = (
        metrics.outage_probability(served_per_frame, num_volte) if num_volte >= 1 else None
    )
    jain = metrics.jain_index(data_user_bits) if k >= 1 else None
    m = metrics.RunMetrics(
        volte_throughput_bits_per_frame=c_volte / cfg.frames,
        data_throughput_bits_per_frame=c_data / cfg.frames,
        total_throughput=(c_volte + c_data) / cfg.frames,
        jain_index=jain,
        outage_fraction=outage,
        infeasible=infeasible_frames / cfg.frames,
    )
    return RunResult(m, data_user_bits, c_volte, c_data, ops)


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Full sweep; rows sorted by (policy, U, run) and fully seed-determined."""
    for policy in cfg.policies:
        for u in cfg.volte_sweep:
            check_size_caps(cfg, policy, u)

    rows = []
    for policy in sorted(cfg.policies):
        for u in sorted(cfg.volte_sweep):
            for run in range(cfg.runs):
                res = simulate_run(cfg, policy, u, run)
                m = res.metrics
                rows.append(
                    {
                        "policy": policy,
                        "bandwidth_mhz": _fmt(cfg.bandwidth_mhz),
                        "N": cfg.num_prb,
                        "U": u,
                        "K": cfg.num_data,
                        "seed": int(run_seed(cfg.seed, u, run).generate_state(1)[0]),
                        "volte_kbps": _fmt(metrics.bits_per_frame_to_kbps(m.volte_throughput_bits_per_frame)),
                        "data_kbps": _fmt(metrics.bits_per_frame_to_kbps(m.data_throughput_bits_per_frame)),
                        "total_kbps": _fmt(metrics.bits_per_frame_to_kbps(m.total_throughput)),
                        "jain": _fmt(m.jain_index) if m.jain_index is not None else "",
                        "outage": _fmt(m.outage_fraction) if m.outage_fraction is not None else "",
                        "infeasible": _fmt(m.infeasible),
                    }
                )
    return rows


def _fmt(v) -> str:
    return f"{float(v):.10g}"


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def emit_plotdata(master_csv: str, family: str) -> str:
    """Slice/aggregate a master CSV into one tidy per-figure CSV.

    Families: throughput_vs_u (mean voice/data/total kbps per policy and U),
    outage_vs_u, fairness_vs_u, infeasibility_vs_u.
    """
    if family not in PLOT_FAMILIES:
        raise ValueError(f"unknown figure family {family!r}; expected one of {PLOT_FAMILIES}")
    reader = csv.DictReader(io.StringIO(master_csv))
    groups: dict[tuple, list[dict]] = {}
    for row in reader:
        groups.setdefault((row["policy"], row["bandwidth_mhz"], int(row["U"])), []).append(row)

    def mean_of(rows, col):
        vals = [float(r[col]) for r in rows if r[col] != ""]
        return _fmt(np.mean(vals)) if vals else ""

    col_map = {
        "throughput_vs_u": ["volte_kbps", "data_kbps", "total_kbps"],
        "outage_vs_u": ["outage"],
        "fairness_vs_u": ["jain"],
        "infeasibility_vs_u": ["infeasible"],
    }
    cols = col_map[family]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "bandwidth_mhz", "U"] + [f"mean_{c}" for c in cols])
    for key in sorted(groups):
        rows = groups[key]
        w.writerow(list(key) + [mean_of(rows, c) for c in cols])
    return buf.getvalue()
