"""Intensity measurement simulation through masked DFTs, the additive
Gaussian noise model, and the delimited on-disk formats.

Signals are plain complex numpy vectors of length M. All inner products are
linear in the first slot and conjugate-linear in the second, and the
analysis sinusoids carry a 1/M factor, so <x, D f_m> equals the m-th entry
of fft(conj(diag) * x) / M.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .masks import DiagonalMask, MaskEnsemble

__all__ = [
    "NoiseModel",
    "MeasurementSet",
    "analyze",
    "measure_all",
    "add_noise",
    "write_measurements",
    "read_measurements",
    "write_signal",
    "read_signal",
]


@dataclass(frozen=True)
class NoiseModel:
    """Independent N(0, variance) perturbation of every intensity."""

    variance: float
    seed: int | None = None

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be >= 0")


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Vertex intensities (K, M) and edge intensities (pairs, |A|, 3, M).

    pairs lists (k, kp) with kp <= k in lexicographic order, so flattening
    the edge array in C order matches the canonical (k, kp, a, r, m)
    enumeration used for noise draws and CSV rows. Clean intensities are
    nonnegative; noisy ones may be negative and are stored as-is.
    """

    dim: int
    K: int
    pairs: tuple[tuple[int, int], ...]
    a_values: tuple[int, ...]
    vertex: np.ndarray
    edge: np.ndarray
    noise_variance: float = 0.0

    def __post_init__(self):
        if self.vertex.shape != (self.K, self.dim):
            raise ValueError("vertex intensity array has wrong shape")
        if self.edge.shape != (len(self.pairs), len(self.a_values), 3, self.dim):
            raise ValueError("edge intensity array has wrong shape")


def analyze(x, mask: DiagonalMask) -> np.ndarray:
    """The masked analysis map m -> <x, D f_m>, via one FFT."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (mask.dim,):
        raise ValueError("signal and mask dimensions differ")
    return np.fft.fft(np.conj(mask.diag) * x) / mask.dim


def measure_all(x, ensemble: MaskEnsemble) -> MeasurementSet:
    """Clean squared-magnitude measurements for every mask in the ensemble."""
    x = np.asarray(x, dtype=complex)
    M = ensemble.dim
    if x.shape != (M,):
        raise ValueError("signal and ensemble dimensions differ")
    K = ensemble.vertex.count
    vertex = np.empty((K, M))
    for k, mask in enumerate(ensemble.vertex.masks):
        vertex[k] = np.abs(analyze(x, mask)) ** 2
    pairs = tuple((k, kp) for k in range(K) for kp in range(k + 1))
    a_values = ensemble.modulation_set.elements
    pair_idx = {p: i for i, p in enumerate(pairs)}
    a_idx = {a: i for i, a in enumerate(a_values)}
    edge = np.zeros((len(pairs), len(a_values), 3, M))
    for am in ensemble.auxiliary:
        edge[pair_idx[(am.k, am.kp)], a_idx[am.a], am.r] = np.abs(analyze(x, am.mask)) ** 2
    return MeasurementSet(M, K, pairs, a_values, vertex, edge, 0.0)


def add_noise(meas: MeasurementSet, noise: NoiseModel) -> MeasurementSet:
    """Perturb every intensity independently, vertices first then edges,
    both in their canonical enumeration order; deterministic given the seed."""
    if noise.variance == 0:
        return replace(meas)
    rng = np.random.default_rng(noise.seed)
    sigma = np.sqrt(noise.variance)
    vertex = meas.vertex + sigma * rng.standard_normal(meas.vertex.shape)
    edge = meas.edge + sigma * rng.standard_normal(meas.edge.shape)
    return replace(meas, vertex=vertex, edge=edge,
                   noise_variance=meas.noise_variance + noise.variance)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_measurements(meas: MeasurementSet, path) -> None:
    """CSV rows kind,k,kp,a,r,m,value; vertex rows leave kp/a/r empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "k", "kp", "a", "r", "m", "value"])
        for k in range(meas.K):
            for m in range(meas.dim):
                writer.writerow(["vertex", k, "", "", "", m, _fmt(meas.vertex[k, m])])
        for pi, (k, kp) in enumerate(meas.pairs):
            for ai, a in enumerate(meas.a_values):
                for r in range(3):
                    for m in range(meas.dim):
                        writer.writerow(["edge", k, kp, a, r, m, _fmt(meas.edge[pi, ai, r, m])])


def read_measurements(path) -> MeasurementSet:
    """Rebuild a MeasurementSet from its CSV form. The format does not carry
    the noise variance, so the field is restored as 0."""
    vertex_rows = []
    edge_rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["kind", "k", "kp", "a", "r", "m", "value"]:
            raise ValueError("unexpected measurement CSV header")
        for row in reader:
            kind = row[0]
            if kind == "vertex":
                vertex_rows.append((int(row[1]), int(row[5]), float(row[6])))
            elif kind == "edge":
                edge_rows.append((int(row[1]), int(row[2]), int(row[3]),
                                  int(row[4]), int(row[5]), float(row[6])))
            else:
                raise ValueError(f"unknown row kind {kind!r}")
    if not vertex_rows:
        raise ValueError("no vertex rows found")
    K = max(k for k, _, _ in vertex_rows) + 1
    M = max(m for _, m, _ in vertex_rows) + 1
    pairs = tuple(sorted({(k, kp) for k, kp, _, _, _, _ in edge_rows}))
    a_values = tuple(sorted({a for _, _, a, _, _, _ in edge_rows}))
    expected_pairs = tuple((k, kp) for k in range(K) for kp in range(k + 1))
    if edge_rows and pairs != expected_pairs:
        raise ValueError("edge rows do not cover every mask pair")
    pairs = expected_pairs
    pair_idx = {p: i for i, p in enumerate(pairs)}
    a_idx = {a: i for i, a in enumerate(a_values)}
    vertex = np.full((K, M), np.nan)
    for k, m, value in vertex_rows:
        vertex[k, m] = value
    edge = np.full((len(pairs), len(a_values), 3, M), np.nan)
    for k, kp, a, r, m, value in edge_rows:
        edge[pair_idx[(k, kp)], a_idx[a], r, m] = value
    if np.isnan(vertex).any() or np.isnan(edge).any():
        raise ValueError("measurement CSV is incomplete")
    return MeasurementSet(M, K, pairs, a_values, vertex, edge, 0.0)


def write_signal(x, path) -> None:
    """Complex vector as CSV rows m,re,im."""
    x = np.asarray(x, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "re", "im"])
        for m, z in enumerate(x):
            writer.writerow([m, _fmt(z.real), _fmt(z.imag)])


def read_signal(path) -> np.ndarray:
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["m", "re", "im"]:
            raise ValueError("unexpected signal CSV header")
        for row in reader:
            entries[int(row[0])] = complex(float(row[1]), float(row[2]))
    if sorted(entries) != list(range(len(entries))):
        raise ValueError("signal CSV rows must cover 0..M-1")
    return np.array([entries[m] for m in range(len(entries))], dtype=complex)
