"""Seeded chi-square variance components built from squared normals.

Random numbers come from the counter-based Philox-4x64 generator. A stream
is identified by a 64-bit seed (hashed into the 128-bit Philox key) and a
position measured in 64-bit words. Word ``w`` of a stream is produced by
counter ``w // 4``, so any slice of a stream can be generated directly
without replaying the words before it. This is what makes simulation
results independent of how replications are split into blocks or threads.

Normals are produced by inversion: the top 52 bits of a word give a uniform
``u = (m + 0.5) / 2**52``, which is exactly representable and strictly inside
(0, 1), and ``z = Phi^-1(u)`` (``scipy.special.ndtri``). One word yields
exactly one normal.

A component with ``df`` degrees of freedom and true variance ``sigma2`` is
drawn as ``sigma2 * sum(z_i**2 for i in range(df)) / df``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

__all__ = [
    "MAX_SEED",
    "derive_seed",
    "philox_key",
    "words_to_uniforms",
    "RngStream",
    "ComponentLaw",
    "sample_standard_normal",
    "sample_component",
    "sample_components",
    "MomentCheck",
    "chi_square_moments",
    "oracle_second_moment",
]

MAX_SEED = 2**64 - 1
_WORDS_PER_COUNTER = 4
_TWO_M52 = 2.0**-52


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def derive_seed(seed: int, *indices: int) -> int:
    """Hash a parent seed and integer indices into a child 64-bit seed."""
    seq = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(i) for i in indices))
    return int(seq.generate_state(1, np.uint64)[0])


def philox_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(_check_seed(seed)).generate_state(2, np.uint64)


def words_to_uniforms(words: np.ndarray) -> np.ndarray:
    return ((words >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_M52


class RngStream:
    """Position in a counter-based random stream.

    Instances are cheap, hold no shared state and may be handed between
    threads; two streams with the same seed and position produce the same
    numbers.
    """

    def __init__(self, seed: int, position: int = 0):
        self.seed = _check_seed(seed)
        if position < 0:
            raise ValueError("position must be >= 0")
        self.position = int(position)
        self._key = philox_key(self.seed)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, position={self.position})"

    def words_at(self, start: int, n: int) -> np.ndarray:
        """Raw 64-bit words ``[start, start + n)`` without moving the stream."""
        counter, skip = divmod(start, _WORDS_PER_COUNTER)
        bitgen = np.random.Philox(key=self._key, counter=counter)
        return bitgen.random_raw(skip + n)[skip:]

    def words(self, n: int) -> np.ndarray:
        out = self.words_at(self.position, n)
        self.position += n
        return out

    def uniforms(self, n: int) -> np.ndarray:
        return words_to_uniforms(self.words(n))

    def normals(self, n: int) -> np.ndarray:
        """Next ``n`` standard normals; same values as ``n`` scalar draws."""
        return ndtri(self.uniforms(n))


@dataclass(frozen=True)
class ComponentLaw:
    """Sampling law of one component: ``sigma2 * chi2(df) / df``."""

    sigma2: float
    df: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2!r}")
        if isinstance(self.df, bool) or int(self.df) != self.df or self.df < 1:
            raise ValueError(f"df must be an integer >= 1, got {self.df!r}")
        object.__setattr__(self, "df", int(self.df))


def sample_standard_normal(stream: RngStream) -> float:
    return float(stream.normals(1)[0])


def sample_components(law: ComponentLaw, n: int, stream: RngStream) -> np.ndarray:
    """``n`` independent draws from ``law``, consuming ``n * law.df`` words."""
    z = stream.normals(n * law.df).reshape(n, law.df)
    return law.sigma2 * np.square(z).sum(axis=1) / law.df


def sample_component(law: ComponentLaw, stream: RngStream) -> float:
    return float(sample_components(law, 1, stream)[0])


class MomentCheck(NamedTuple):
    mean: float
    mean_se: float
    second: float
    second_se: float


def chi_square_moments(nu: int, reps: int, seed: int, chunk: int = 1 << 20) -> MomentCheck:
    """Monte-Carlo first and second raw moments of ``sum(z_i**2, i < nu)``.

    Standard errors are the sample standard deviations over ``sqrt(reps)``.
    """
    if int(nu) != nu or nu < 1:
        raise ValueError("nu must be an integer >= 1")
    if reps < 2:
        raise ValueError("reps must be >= 2")
    stream = RngStream(seed)
    per_chunk = max(1, chunk // nu)
    parts = []
    done = 0
    while done < reps:
        n = min(per_chunk, reps - done)
        parts.append(np.square(stream.normals(n * nu)).reshape(n, nu).sum(axis=1))
        done += n
    x = np.concatenate(parts)
    x2 = x * x
    root = math.sqrt(reps)
    return MomentCheck(
        float(x.mean()),
        float(x.std(ddof=1) / root),
        float(x2.mean()),
        float(x2.std(ddof=1) / root),
    )


def oracle_second_moment(nu: int, reps: int, seed: int) -> float:
    """Monte-Carlo estimate of ``E[(chi2_nu)^2]``, which equals ``nu * (nu + 2)``."""
    if reps < 10_000:
        raise ValueError("reps must be >= 10**4")
    return chi_square_moments(nu, reps, seed).second
