"""Diagonal mask families for masked-DFT intensity measurements.

A vertex mask multiplies the signal entrywise before the DFT. An auxiliary
mask merges two vertex masks through a cube-root-of-unity phase and a
frequency modulation, so that the sum of two measurement vectors is again
realizable as a single masked DFT.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .setgen import ModulationSet

__all__ = [
    "OMEGA",
    "DiagonalMask",
    "VertexMaskSet",
    "AuxiliaryMask",
    "MaskEnsemble",
    "build_vertex_masks",
    "check_full_spark",
    "auxiliary_indices",
    "build_auxiliary_masks",
    "build_ensemble",
    "mask_count",
    "ensemble_to_dict",
    "ensemble_from_dict",
    "save_ensemble",
    "load_ensemble",
]

OMEGA = np.exp(2j * np.pi / 3.0)

MASK_MODES = ("deterministic", "random-unit-circle", "gaussian")

# Unit-circle points closer than SPARK_TOL * M count as colliding in the
# distinctness test: far above double-precision noise, far below the root
# spacing 2*sin(pi/(K*M)) at practical sizes.
SPARK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiagonalMask:
    """A diagonal multiplication operator on C^M, stored as its diagonal."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=complex)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("mask diagonal must be a nonempty vector")
        if not np.all(np.isfinite(d)):
            raise ValueError("mask diagonal entries must be finite")
        object.__setattr__(self, "diag", d)

    @property
    def dim(self) -> int:
        return self.diag.size


@dataclass(frozen=True, eq=False)
class VertexMaskSet:
    """The K per-illumination masks applied before the DFT.

    Power-form modes carry the generating scalars in ``alphas`` and satisfy
    diag_k(m) = alphas[k]**m; gaussian mode stores i.i.d. standard-normal
    real diagonals and has no scalars.
    """

    dim: int
    mode: str
    masks: tuple[DiagonalMask, ...]
    alphas: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in MASK_MODES:
            raise ValueError(f"unknown mask mode {self.mode!r}")
        if not self.masks:
            raise ValueError("need at least one mask")
        for mask in self.masks:
            if mask.dim != self.dim:
                raise ValueError("mask dimension mismatch")

    @property
    def count(self) -> int:
        return len(self.masks)


@dataclass(frozen=True, eq=False)
class AuxiliaryMask:
    """One combined mask, indexed by (k, kp, r, a) with kp <= k."""

    k: int
    kp: int
    r: int
    a: int
    mask: DiagonalMask


@dataclass(frozen=True, eq=False)
class MaskEnsemble:
    """Vertex masks plus the full auxiliary family for one modulation set."""

    vertex: VertexMaskSet
    auxiliary: tuple[AuxiliaryMask, ...]
    modulation_set: ModulationSet

    def __post_init__(self):
        if self.modulation_set.dim != self.vertex.dim:
            raise ValueError("modulation set and masks disagree on dimension")
        expected = mask_count(self.vertex.count, len(self.modulation_set)) - self.vertex.count
        if len(self.auxiliary) != expected:
            raise ValueError(f"expected {expected} auxiliary masks, got {len(self.auxiliary)}")
        keys = {(am.k, am.kp, am.r, am.a) for am in self.auxiliary}
        if len(keys) != len(self.auxiliary):
            raise ValueError("duplicate auxiliary mask index")

    @property
    def dim(self) -> int:
        return self.vertex.dim

    @property
    def total_masks(self) -> int:
        return self.vertex.count + len(self.auxiliary)


def _power_masks(alphas: np.ndarray, M: int) -> tuple[DiagonalMask, ...]:
    exponents = np.arange(M)
    return tuple(DiagonalMask(alpha ** exponents) for alpha in alphas)


def build_vertex_masks(M: int, K: int, mode: str = "deterministic",
                       seed: int | None = None, max_retries: int = 8) -> VertexMaskSet:
    """Construct the K vertex masks.

    deterministic: alpha_k = exp(2 pi i k / (K M)), which always yields a
    full-spark measurement family. random-unit-circle: scalars drawn
    uniformly on the unit circle, redrawn (bounded) on the probability-zero
    event of a floating-point collision. gaussian: i.i.d. N(0, 1) real
    diagonals; the full-spark check does not apply and is skipped.
    """
    if M < 1:
        raise ValueError("dimension must be >= 1")
    if K < 1:
        raise ValueError("mask count must be >= 1")
    if mode == "deterministic":
        alphas = np.exp(2j * np.pi * np.arange(K) / (K * M))
        if not check_full_spark(alphas, M):
            raise RuntimeError("deterministic scalars failed the distinctness check")
        return VertexMaskSet(M, mode, _power_masks(alphas, M), alphas, seed)
    if mode == "random-unit-circle":
        rng = np.random.default_rng(seed)
        for _ in range(max_retries):
            alphas = np.exp(2j * np.pi * rng.random(K))
            if check_full_spark(alphas, M):
                return VertexMaskSet(M, mode, _power_masks(alphas, M), alphas, seed)
        raise RuntimeError("could not draw full-spark mask scalars")
    if mode == "gaussian":
        rng = np.random.default_rng(seed)
        diags = rng.standard_normal((K, M))
        masks = tuple(DiagonalMask(row.astype(complex)) for row in diags)
        return VertexMaskSet(M, mode, masks, None, seed)
    raise ValueError(f"unknown mask mode {mode!r}")


def check_full_spark(alphas, M: int) -> bool:
    """True iff the K*M points alpha_k * exp(2 pi i m / M) are pairwise
    distinct, i.e. no ratio alpha_k / alpha_kp is an M-th root of unity."""
    a = np.asarray(alphas, dtype=complex).ravel()
    if np.any(a == 0):
        raise ValueError("mask scalars must be nonzero")
    tol = SPARK_TOL * M
    two_pi = 2.0 * np.pi
    for i in range(a.size):
        for j in range(i + 1, a.size):
            ratio = a[i] / a[j]
            nearest = np.exp(2j * np.pi * np.round(np.angle(ratio) * M / two_pi) / M)
            if abs(ratio - nearest) < tol:
                return False
    return True


def auxiliary_indices(K: int, elements) -> Iterator[tuple[int, int, int, int]]:
    """Yield (k, kp, a, r) in the fixed emission order: kp <= k, a ascending
    within the modulation set, r in 0..2."""
    for k in range(K):
        for kp in range(k + 1):
            for a in elements:
                for r in range(3):
                    yield k, kp, a, r


def build_auxiliary_masks(vertex: VertexMaskSet, A: ModulationSet) -> tuple[AuxiliaryMask, ...]:
    """One auxiliary mask per (k, kp, r, a); entrywise
    diag_k(m) + omega**r * exp(2 pi i a m / M) * diag_kp(m)."""
    if A.dim != vertex.dim:
        raise ValueError("modulation set and masks disagree on dimension")
    M = vertex.dim
    grid = np.arange(M)
    out = []
    for k, kp, a, r in auxiliary_indices(vertex.count, A.elements):
        modulation = np.exp(2j * np.pi * a * grid / M)
        diag = vertex.masks[k].diag + OMEGA ** r * modulation * vertex.masks[kp].diag
        out.append(AuxiliaryMask(k, kp, r, a, DiagonalMask(diag)))
    return tuple(out)


def build_ensemble(vertex: VertexMaskSet, A: ModulationSet) -> MaskEnsemble:
    return MaskEnsemble(vertex, build_auxiliary_masks(vertex, A), A)


def mask_count(K: int, set_size: int) -> int:
    """Total masks K + 3 * C(K+1, 2) * |A| for K vertex masks and set size |A|."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if set_size < 0:
        raise ValueError("set size must be >= 0")
    return K + 3 * (K * (K + 1) // 2) * set_size


def _complex_pairs(values: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


def _pairs_complex(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def ensemble_to_dict(ensemble: MaskEnsemble) -> dict:
    return {
        "dim": ensemble.dim,
        "K": ensemble.vertex.count,
        "alpha_mode": ensemble.vertex.mode,
        "seed": ensemble.vertex.seed,
        "modulation_set": list(ensemble.modulation_set.elements),
        "vertex_masks": [_complex_pairs(m.diag) for m in ensemble.vertex.masks],
        "auxiliary_masks": [
            {"k": am.k, "k'": am.kp, "r": am.r, "a": am.a, "diag": _complex_pairs(am.mask.diag)}
            for am in ensemble.auxiliary
        ],
    }


def ensemble_from_dict(doc: dict) -> MaskEnsemble:
    dim = int(doc["dim"])
    mode = doc["alpha_mode"]
    diags = [_pairs_complex(pairs) for pairs in doc["vertex_masks"]]
    alphas = None
    if mode != "gaussian" and dim >= 2:
        alphas = np.array([d[1] for d in diags])
    vertex = VertexMaskSet(dim, mode, tuple(DiagonalMask(d) for d in diags), alphas, doc.get("seed"))
    mod = ModulationSet(dim, tuple(int(a) for a in doc["modulation_set"]))
    aux = tuple(
        AuxiliaryMask(int(e["k"]), int(e["k'"]), int(e["r"]), int(e["a"]),
                      DiagonalMask(_pairs_complex(e["diag"])))
        for e in doc["auxiliary_masks"]
    )
    return MaskEnsemble(vertex, aux, mod)


def save_ensemble(ensemble: MaskEnsemble, path) -> None:
    with open(path, "w") as fh:
        json.dump(ensemble_to_dict(ensemble), fh)
        fh.write("\n")


def load_ensemble(path) -> MaskEnsemble:
    with open(path) as fh:
        return ensemble_from_dict(json.load(fh))
