"""Seeded experiment sweeps: mask and set generation per trial, noise
levels on shared instances, CSV reporting, and error-bar figures."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .masks import build_ensemble, build_vertex_masks, mask_count
from .measure import NoiseModel, add_noise, measure_all
from .recover import RecoveryParams, RecoveryResult, recover, relative_error
from .setgen import SetGenConfig, draw_B, symmetrize

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "CellSummary",
    "mix_seed",
    "draw_signal",
    "run_experiment",
    "summarize",
    "error_bar_bounds",
    "emit_plots",
    "load_config",
    "write_records",
    "read_records",
    "RESULTS_HEADER",
]

RESULTS_HEADER = ["M", "sigma2", "trial", "seed", "num_masks", "set_size",
                  "runtime_ms", "rel_error", "surviving_vertices", "final_gap", "success"]

MASK_MODES = ("gaussian", "deterministic")

# plain-log: inclusion probability ln(M)/M over the nonzero residues.
# scaled-log: probability c*ln(M)/M over all residues (clamped at 1).
SET_DENSITY_MODES = ("plain-log", "scaled-log")

SIGNAL_MODES = ("complex", "real")

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit stream seed (splitmix64 chain)."""
    z = 0
    for part in parts:
        z = _splitmix64(z ^ (int(part) & _MASK64))
    return z


@dataclass(frozen=True)
class ExperimentConfig:
    dims: tuple[int, ...]
    noise_variances: tuple[float, ...]
    trials: int
    K: int = 3
    mask_mode: str = "gaussian"
    set_density_mode: str = "plain-log"
    c: float | None = None
    alpha: float = 0.99
    tau: float = 0.1
    master_seed: int = 0
    signal_mode: str = "complex"

    def __post_init__(self):
        if not self.dims:
            raise ValueError("dims must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mask_mode not in MASK_MODES:
            raise ValueError(f"unknown mask mode {self.mask_mode!r}")
        if self.set_density_mode not in SET_DENSITY_MODES:
            raise ValueError(f"unknown set density mode {self.set_density_mode!r}")
        if self.set_density_mode == "scaled-log" and self.c is None:
            raise ValueError("scaled-log density requires c")
        if self.signal_mode not in SIGNAL_MODES:
            raise ValueError(f"unknown signal mode {self.signal_mode!r}")


@dataclass(frozen=True)
class TrialRecord:
    M: int
    sigma2: float
    trial_index: int
    seed: int
    num_masks: int
    set_size: int
    runtime_ms: float
    rel_error: float
    surviving_vertices: int
    final_gap: float
    success: bool


def draw_signal(M: int, rng: np.random.Generator, mode: str = "complex") -> np.ndarray:
    """Complex mode: independent N(0, 1/2) real and imaginary parts (unit
    variance per entry); real mode: N(0, 1) entries."""
    if mode == "real":
        return rng.standard_normal(M).astype(complex)
    if mode == "complex":
        return (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / math.sqrt(2.0)
    raise ValueError(f"unknown signal mode {mode!r}")


def _set_config(config: ExperimentConfig, M: int, seed: int) -> SetGenConfig:
    if config.set_density_mode == "plain-log":
        return SetGenConfig(M, min(1.0, math.log(M) / M), restrict_nonzero=True, seed=seed)
    return SetGenConfig.from_bias_constant(M, config.c, restrict_nonzero=False, seed=seed)


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    """Run the (M, sigma2, trial) grid.

    Masks, modulation set, and signal are drawn once per (M, trial) from
    seeds mixed out of the master seed, then reused across noise levels so
    that noise variances are compared on identical instances. Trial
    failures are recorded, never raised.
    """
    params = RecoveryParams(alpha=config.alpha, tau=config.tau)
    records = []
    for M in config.dims:
        for trial in range(config.trials):
            seed = mix_seed(config.master_seed, M, trial)
            vertex = build_vertex_masks(M, config.K, mode=config.mask_mode,
                                        seed=mix_seed(seed, 1))
            A = symmetrize(draw_B(_set_config(config, M, mix_seed(seed, 2))), M)
            x = draw_signal(M, np.random.default_rng(mix_seed(seed, 3)), config.signal_mode)
            ensemble = build_ensemble(vertex, A)
            clean = measure_all(x, ensemble)
            for j, sigma2 in enumerate(config.noise_variances):
                noisy = add_noise(clean, NoiseModel(float(sigma2), mix_seed(seed, 4, j)))
                start = time.perf_counter()
                try:
                    result = recover(noisy, ensemble, params)
                except Exception:  # defensive: a broken trial must not abort the sweep
                    result = RecoveryResult(np.zeros(M, dtype=complex), 0, 0.0, 0,
                                            False, failed_stage="unexpected")
                runtime_ms = (time.perf_counter() - start) * 1e3
                records.append(TrialRecord(
                    M=M, sigma2=float(sigma2), trial_index=trial, seed=seed,
                    num_masks=mask_count(config.K, len(A)), set_size=len(A),
                    runtime_ms=runtime_ms,
                    rel_error=relative_error(result.estimate, x),
                    surviving_vertices=result.surviving_vertices,
                    final_gap=result.final_gap, success=result.success))
    records.sort(key=lambda r: (r.M, r.sigma2, r.trial_index))
    return records


@dataclass(frozen=True)
class CellSummary:
    M: int
    sigma2: float
    n: int
    rel_error_mean: float
    rel_error_std: float
    runtime_ms_mean: float
    runtime_ms_std: float
    single_trial: bool


def _sample_std(values: np.ndarray) -> float:
    # constant cells report exactly 0, not mean-roundoff noise
    if values.size < 2 or np.all(values == values[0]):
        return 0.0
    return float(values.std(ddof=1))


def summarize(records) -> list[CellSummary]:
    """Per-(M, sigma2) sample mean and (n-1)-normalized standard deviation;
    single-record cells report std 0 and a flag."""
    if not records:
        raise ValueError("no records to summarize")
    cells: dict[tuple[int, float], list[TrialRecord]] = {}
    for rec in records:
        cells.setdefault((rec.M, rec.sigma2), []).append(rec)
    out = []
    for (M, sigma2) in sorted(cells):
        rs = cells[(M, sigma2)]
        errs = np.array([r.rel_error for r in rs])
        times = np.array([r.runtime_ms for r in rs])
        out.append(CellSummary(
            M, sigma2, len(rs),
            float(errs.mean()), _sample_std(errs),
            float(times.mean()), _sample_std(times),
            len(rs) == 1))
    return out


def error_bar_bounds(means, stds):
    """Symmetric bars except that a lower bar reaching <= 0 is omitted
    (length 0), keeping the log scale drawable."""
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    lower = np.where(means - stds > 0, stds, 0.0)
    return lower, stds.copy()


def emit_plots(summary, out_dir) -> list[Path]:
    """One SVG per noise level: M on a log2 x-axis, mean relative error on a
    log10 y-axis, mean +/- one sample standard deviation."""
    if not summary:
        raise ValueError("empty summary")
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for sigma2 in sorted({c.sigma2 for c in summary}):
        cells = sorted((c for c in summary if c.sigma2 == sigma2), key=lambda c: c.M)
        dims = [c.M for c in cells]
        means = [c.rel_error_mean for c in cells]
        stds = [c.rel_error_std for c in cells]
        lower, upper = error_bar_bounds(means, stds)
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.errorbar(dims, means, yerr=[lower, upper], marker="o", capsize=3)
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
        ax.set_xlabel("signal dimension M")
        ax.set_ylabel("relative error")
        ax.set_title(f"noise variance {sigma2:g}")
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        path = out / f"rel_error_sigma2_{sigma2:g}.svg"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths


def load_config(path) -> ExperimentConfig:
    """Parse the flat "key = value" experiment description."""
    raw: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key] = value
    try:
        kwargs = {
            "dims": tuple(int(v) for v in raw.pop("dims").split(",") if v.strip()),
            "noise_variances": tuple(float(v) for v in raw.pop("noise_variances").split(",") if v.strip()),
            "trials": int(raw.pop("trials")),
        }
    except KeyError as missing:
        raise ValueError(f"config requires dims, noise_variances, trials (missing {missing})")
    for key, conv in [("K", int), ("mask_mode", str), ("set_density_mode", str),
                      ("c", float), ("alpha", float), ("tau", float),
                      ("master_seed", int), ("signal_mode", str)]:
        if key in raw:
            kwargs[key] = conv(raw.pop(key))
    if raw:
        raise ValueError(f"unknown config keys: {sorted(raw)}")
    return ExperimentConfig(**kwargs)


def write_records(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in records:
            writer.writerow([r.M, format(r.sigma2, "g"), r.trial_index, r.seed,
                             r.num_masks, r.set_size, format(r.runtime_ms, ".6g"),
                             format(r.rel_error, ".17g"), r.surviving_vertices,
                             format(r.final_gap, ".17g"),
                             "true" if r.success else "false"])


def read_records(path) -> list[TrialRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError("unexpected results CSV header")
        for row in reader:
            records.append(TrialRecord(
                M=int(row["M"]), sigma2=float(row["sigma2"]),
                trial_index=int(row["trial"]), seed=int(row["seed"]),
                num_masks=int(row["num_masks"]), set_size=int(row["set_size"]),
                runtime_ms=float(row["runtime_ms"]), rel_error=float(row["rel_error"]),
                surviving_vertices=int(row["surviving_vertices"]),
                final_gap=float(row["final_gap"]),
                success=row["success"] == "true"))
    return records
