"""Seedable Rayleigh channel generation and random-matrix estimators.

Channels are Q x L matrices of i.i.d. circularly-symmetric complex
Gaussians with unit variance (1/2 per real component).  All randomness is
counter-based: a :class:`RngSeed` keys an independent Philox stream, so
any (seed, stream_id) pair reproduces the same draw regardless of
execution order or parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_U64 = 2**64


class SingularDraw(RuntimeError):
    """A numerically singular Gram matrix persisted past the resample cap."""


@dataclass(frozen=True)
class RngSeed:
    """Key for one reproducible random stream.

    ``substream(t)`` derives the stream for trial ``t``; it is a pure
    function of (seed, stream_id, t), which makes Monte Carlo trials
    independently reproducible and safe to fan out across workers.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < _U64 and 0 <= self.stream_id < _U64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")

    def substream(self, offset: int) -> "RngSeed":
        return RngSeed(self.seed, (self.stream_id + offset) % _U64)

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def complex_gaussian(gen: np.random.Generator, Q: int, L: int) -> np.ndarray:
    """Q x L i.i.d. CN(0, 1) draws from an existing generator.

    Real and imaginary parts are independent N(0, 1/2); the real block is
    drawn first so that moments are reproducible under any generator with
    the same normal transform.
    """
    re = gen.standard_normal((Q, L))
    im = gen.standard_normal((Q, L))
    return (re + 1j * im) * np.sqrt(0.5)


def draw_channel(Q: int, L: int, rng: RngSeed) -> np.ndarray:
    """One Rayleigh channel realization, deterministic given ``rng``."""
    if Q < 1 or L < 1:
        raise ValueError(f"Q={Q} and L={L} must be positive")
    return complex_gaussian(rng.generator(), Q, L)


_RESAMPLE_CAP = 8


def wishart_inv_trace_mc(Q: int, L: int, trials: int, rng: RngSeed) -> float:
    """Monte Carlo estimate of E{Tr{(H H^H)^-1}} for a Q x L channel H.

    Requires L > Q so the Gram matrix is almost surely invertible; the
    estimate converges to Q / (L - Q).  Singular draws are resampled from
    the same substream (keeping trial t a pure function of the seed) and
    raise :class:`SingularDraw` past a small cap.
    """
    if not L > Q:
        raise ValueError(f"need L > Q for an invertible Gram matrix, got Q={Q}, L={L}")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def one_trial(t: int) -> float:
        gen = rng.substream(t).generator()
        for _ in range(_RESAMPLE_CAP):
            H = complex_gaussian(gen, Q, L)
            w = np.linalg.eigvalsh(H @ H.conj().T)
            if w[0] > w[-1] * 1e-12:
                return float(np.sum(1.0 / w))
        raise SingularDraw(f"trial {t}: Gram matrix singular {_RESAMPLE_CAP} times in a row")

    from ccdl._parallel import map_ordered

    values = map_ordered(one_trial, range(trials))
    return math.fsum(values) / trials


def resolvent_trace(H: np.ndarray, z: float) -> float:
    """Normalized resolvent trace (1/L) Tr{(z I_L + (1/L) H^H H)^-1}.

    Computed from the singular values of H rather than a direct inverse,
    which stays stable as Q/L approaches 1.  Always lies in (0, 1/z].
    """
    if z <= 0:
        raise ValueError(f"z={z} must be positive")
    L = H.shape[1]
    s = np.linalg.svd(H, compute_uv=False)
    lam = (s * s) / L
    return float((np.sum(1.0 / (lam + z)) + (L - lam.size) / z) / L)
