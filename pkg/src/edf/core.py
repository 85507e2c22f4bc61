"""Effective degrees of freedom for sums of independent variance components.

A complex variance estimate is the sum ``S2* = sum(s2_k)`` of K independent
components, each distributed as ``sigma2_k * chi2(df_k) / df_k``. Four
estimators of the effective degrees of freedom of ``S2*`` are provided:

``satterthwaite``
    The classic moment-matching estimator ``(sum s2)^2 / sum(s2^2 / df)``.
``naep``
    The classic estimator scaled by the empirical Johnson & Rust multiplier
    ``3.16 - 2.77 / sqrt(K)`` (calibrated for one-df jackknife designs).
``proposed_v1``
    Plug-in corrected estimator
    ``(sum s2)^2 / [(1 + 2/sum df) * sum(s2^2 / (df + 2))]``.
``improved``
    As ``proposed_v1`` with the squared-total correction
    ``1 + 2/((1 - 1/K) * sum df)``.

All estimators are written in terms of the normalized components
``r_k = s2_k / sum(s2)``, so they are exactly homogeneous of degree zero in
the variances and immune to overflow of ``s2**2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "EdfError",
    "InvalidComponent",
    "AllZeroComponents",
    "EmptyInput",
    "InvalidK",
    "InvalidNu",
    "VarianceComponent",
    "ComponentSet",
    "EstimatorKind",
    "DfEstimate",
    "satterthwaite_df",
    "jr_lambda",
    "naep_df",
    "proposed_df_v1",
    "improved_df",
    "adjustment_factor_v1",
    "improved_multiplier",
    "normalized_components",
    "estimate",
    "estimate_all",
    "batch_estimates",
]


class EdfError(ValueError):
    """Base class for all errors raised by this package."""

    code = "EdfError"

    def __init__(self, message: str, *, line: int | None = None):
        super().__init__(message)
        self.line = line


class InvalidComponent(EdfError):
    code = "InvalidComponent"


class AllZeroComponents(EdfError):
    """Every component variance is zero, so the df ratio is 0/0."""

    code = "AllZeroComponents"

    def __init__(self, message: str = "degenerate: all components zero", **kw):
        super().__init__(message, **kw)


class EmptyInput(EdfError):
    code = "EmptyInput"


class InvalidK(EdfError):
    code = "InvalidK"


class InvalidNu(EdfError):
    code = "InvalidNu"


@dataclass(frozen=True)
class VarianceComponent:
    """One component variance estimate ``s2`` with ``df`` degrees of freedom."""

    s2: float
    df: float

    def __post_init__(self) -> None:
        s2, df = float(self.s2), float(self.df)
        if not math.isfinite(s2) or s2 < 0:
            raise InvalidComponent(f"s2 must be a finite value >= 0, got {self.s2!r}")
        if not math.isfinite(df) or df < 1:
            raise InvalidComponent(f"df must be a finite value >= 1, got {self.df!r}")
        object.__setattr__(self, "s2", s2)
        object.__setattr__(self, "df", df)


@dataclass(frozen=True)
class ComponentSet:
    """Ordered, non-empty collection of variance components."""

    components: tuple[VarianceComponent, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise EmptyInput("a component set needs at least one component")
        for c in comps:
            if not isinstance(c, VarianceComponent):
                raise InvalidComponent(f"expected VarianceComponent, got {type(c).__name__}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> ComponentSet:
        return cls(tuple(VarianceComponent(s2, df) for s2, df in pairs))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def s2(self) -> list[float]:
        return [c.s2 for c in self.components]

    @property
    def df(self) -> list[float]:
        return [c.df for c in self.components]

    @property
    def total_s2(self) -> float:
        return math.fsum(self.s2)

    @property
    def total_df(self) -> float:
        return math.fsum(self.df)


class EstimatorKind(str, enum.Enum):
    SATTERTHWAITE = "satterthwaite"
    NAEP = "naep"
    PROPOSED_V1 = "proposed_v1"
    IMPROVED = "improved"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DfEstimate:
    value: float
    estimator: EstimatorKind
    k: int
    total_df: float


def _check_k(k: int, minimum: int = 1) -> int:
    if isinstance(k, bool) or int(k) != k or k < minimum:
        raise InvalidK(f"K must be an integer >= {minimum}, got {k!r}")
    return int(k)


def _check_nu(nu: float) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu < 1:
        raise InvalidNu(f"nu must be a finite value >= 1, got {nu!r}")
    return nu


def normalized_components(components: ComponentSet) -> list[float]:
    """Each component's share of the total, ``s2_k / sum(s2)``.

    The sum of squared shares lies in ``[1/K, 1]``: ``1/K`` when all
    components are equal and 1 when a single component carries everything.
    """
    total = components.total_s2
    if total == 0.0:
        raise AllZeroComponents()
    return [s / total for s in components.s2]


def _estimate(components: ComponentSet, kind: EstimatorKind, value: float) -> DfEstimate:
    return DfEstimate(value, kind, components.k, components.total_df)


def _inverse_classic(shares: Sequence[float], dfs: Sequence[float], extra: float = 0.0) -> float:
    # sum r_k^2 / (df_k + extra), with r = normalized shares
    return math.fsum(r * r / (df + extra) for r, df in zip(shares, dfs))


def satterthwaite_df(components: ComponentSet) -> DfEstimate:
    """Classic Satterthwaite estimate ``(sum s2)^2 / sum(s2^2 / df)``."""
    shares = normalized_components(components)
    value = 1.0 / _inverse_classic(shares, components.df)
    return _estimate(components, EstimatorKind.SATTERTHWAITE, value)


def jr_lambda(k: int) -> float:
    """Johnson & Rust multiplier ``3.16 - 2.77 / sqrt(k)``."""
    k = _check_k(k)
    return 3.16 - 2.77 / math.sqrt(k)


def naep_df(components: ComponentSet) -> DfEstimate:
    """Classic estimate times :func:`jr_lambda` of the number of components.

    The multiplier was calibrated on designs where every component has one
    degree of freedom; for K=1 or larger df it is applied as-is.
    """
    classic = satterthwaite_df(components).value
    return _estimate(components, EstimatorKind.NAEP, jr_lambda(components.k) * classic)


def proposed_df_v1(components: ComponentSet) -> DfEstimate:
    shares = normalized_components(components)
    correction = 1.0 + 2.0 / components.total_df
    value = 1.0 / (correction * _inverse_classic(shares, components.df, 2.0))
    return _estimate(components, EstimatorKind.PROPOSED_V1, value)


def improved_df(components: ComponentSet) -> DfEstimate:
    """Corrected estimator with the ``(1 - 1/K)`` finite-K factor.

    For a single component the correction is undefined (division by zero);
    the effective df is then just that component's df.
    """
    shares = normalized_components(components)
    if components.k == 1:
        return _estimate(components, EstimatorKind.IMPROVED, components.df[0])
    k = components.k
    correction = 1.0 + 2.0 / ((1.0 - 1.0 / k) * components.total_df)
    value = 1.0 / (correction * _inverse_classic(shares, components.df, 2.0))
    return _estimate(components, EstimatorKind.IMPROVED, value)


def adjustment_factor_v1(nu: float, k: int) -> float:
    """Equal-df multiplier ``(nu + 2) / (1 + 2/(k*nu))`` on ``(sum s2)^2 / sum s2^2``.

    Dividing by ``nu`` gives the factor relating ``proposed_df_v1`` to the
    classic estimate.
    """
    nu = _check_nu(nu)
    k = _check_k(k)
    return (nu + 2.0) / (1.0 + 2.0 / (k * nu))


def improved_multiplier(nu: float, k: int) -> float:
    """Ratio ``improved_df / satterthwaite_df`` when every df equals ``nu``."""
    nu = _check_nu(nu)
    k = _check_k(k, minimum=2)
    return (nu + 2.0) / (nu * (1.0 + 2.0 / ((k - 1) * nu)))


_DISPATCH = {
    EstimatorKind.SATTERTHWAITE: satterthwaite_df,
    EstimatorKind.NAEP: naep_df,
    EstimatorKind.PROPOSED_V1: proposed_df_v1,
    EstimatorKind.IMPROVED: improved_df,
}


def estimate(components: ComponentSet, kind: EstimatorKind | str) -> DfEstimate:
    return _DISPATCH[EstimatorKind(kind)](components)


def estimate_all(components: ComponentSet) -> dict[EstimatorKind, DfEstimate]:
    return {kind: fn(components) for kind, fn in _DISPATCH.items()}


def batch_estimates(s2: np.ndarray, df) -> dict[EstimatorKind, np.ndarray]:
    """All four estimators for many component sets at once.

    ``s2`` has shape ``(n, K)``, one component set per row; ``df`` is a
    scalar or a length-K vector shared by every row. Rows must contain at
    least one positive entry.
    """
    s2 = np.asarray(s2, dtype=np.float64)
    if s2.ndim != 2 or s2.shape[1] < 1:
        raise ValueError("s2 must have shape (n, K) with K >= 1")
    k = s2.shape[1]
    df = np.broadcast_to(np.asarray(df, dtype=np.float64), (k,))
    total_df = math.fsum(df)

    total = s2.sum(axis=1, keepdims=True)
    if np.any(total == 0.0):
        raise AllZeroComponents()
    shares2 = (s2 / total) ** 2

    classic = 1.0 / (shares2 / df).sum(axis=1)
    plugin = (shares2 / (df + 2.0)).sum(axis=1)
    proposed = 1.0 / ((1.0 + 2.0 / total_df) * plugin)
    if k == 1:
        improved = np.full(s2.shape[0], df[0])
    else:
        improved = 1.0 / ((1.0 + 2.0 / ((1.0 - 1.0 / k) * total_df)) * plugin)
    return {
        EstimatorKind.SATTERTHWAITE: classic,
        EstimatorKind.NAEP: jr_lambda(k) * classic,
        EstimatorKind.PROPOSED_V1: proposed,
        EstimatorKind.IMPROVED: improved,
    }
