"""Random symmetric modulation sets over Z_M and their Fourier bias.

A modulation set drives both the auxiliary-mask family and the edge set of
the polarization graph: a residue a in the set connects measurement index m
to m + a. Sets are drawn as sparse Bernoulli subsets, symmetrized, and
certified through their Fourier bias, which controls the spectral gap of
the resulting graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "ModulationSet",
    "SetGenConfig",
    "draw_B",
    "symmetrize",
    "fourier_bias",
    "spectral_gap_from_bias",
    "min_size_lower_bound",
]


@dataclass(frozen=True)
class ModulationSet:
    """A set of nonzero residues of Z_M closed under negation mod M."""

    dim: int
    elements: tuple[int, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        elems = tuple(int(e) for e in self.elements)
        if list(elems) != sorted(set(elems)):
            raise ValueError("elements must be sorted and unique")
        eset = set(elems)
        for e in elems:
            if not 1 <= e <= self.dim - 1:
                raise ValueError(f"element {e} outside 1..{self.dim - 1}")
            if (self.dim - e) % self.dim not in eset:
                raise ValueError(f"set is not symmetric: missing {self.dim - e}")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def from_elements(cls, dim: int, elements: Iterable[int]) -> "ModulationSet":
        return cls(dim, tuple(sorted({int(e) % dim for e in elements})))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, item) -> bool:
        return item in self.elements

    def indicator(self) -> np.ndarray:
        ind = np.zeros(self.dim)
        if self.elements:
            ind[list(self.elements)] = 1.0
        return ind


@dataclass(frozen=True)
class SetGenConfig:
    """Bernoulli sampling plan for the base set B."""

    dim: int
    density: float
    restrict_nonzero: bool = False
    seed: int | None = None
    c: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must lie in [0, 1]")

    @classmethod
    def from_bias_constant(cls, dim: int, c: float, restrict_nonzero: bool = False,
                           seed: int | None = None) -> "SetGenConfig":
        """Density c * ln(dim) / dim, clamped to 1 for small dimensions."""
        density = min(1.0, c * math.log(dim) / dim)
        return cls(dim, density, restrict_nonzero, seed, c)


def draw_B(config: SetGenConfig) -> np.ndarray:
    """Draw the Bernoulli base set B as a sorted array of residues.

    Residues are visited in increasing order, consuming one uniform variate
    each, so the draw is reproducible given (dim, density, seed).
    """
    rng = np.random.default_rng(config.seed)
    start = 1 if config.restrict_nonzero else 0
    eligible = np.arange(start, config.dim)
    u = rng.random(eligible.size)
    return eligible[u < config.density]


def symmetrize(B, dim: int) -> ModulationSet:
    """Union of B and -B mod dim, with 0 removed."""
    base = {int(b) % dim for b in B}
    sym = base | {(-b) % dim for b in base}
    sym.discard(0)
    return ModulationSet(dim, tuple(sorted(sym)))


def fourier_bias(S, dim: int) -> float:
    """Largest nonzero-frequency magnitude of the normalized DFT of 1_S.

    Computed as max_{m != 0} |(1/M) sum_{s in S} exp(-2 pi i m s / M)| via
    one length-M FFT of the indicator vector.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2 (no nonzero frequency exists)")
    ind = np.zeros(dim)
    idx = [int(s) % dim for s in S]
    if idx:
        ind[idx] = 1.0
    spectrum = np.fft.fft(ind) / dim
    return float(np.max(np.abs(spectrum[1:])))


def spectral_gap_from_bias(A: ModulationSet) -> float:
    """Spectral gap 1 - (M/|A|) * bias; negative values flag a poor set."""
    if len(A) == 0:
        raise ValueError("modulation set is empty")
    return 1.0 - (A.dim / len(A)) * fourier_bias(A.elements, A.dim)


def min_size_lower_bound(M, eps: float) -> float:
    """Smallest set size compatible with a measured spectral gap above eps."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if M <= 1:
        raise ValueError("M must exceed 1")
    return math.log(M) / (2.0 + math.log(1.0 / eps))
