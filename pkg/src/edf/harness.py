"""Monte-Carlo tables of estimated over true degrees of freedom.

Each cell fixes K components with ``nu`` df each (true df ``K * nu``).
Every replication draws the K components, evaluates all four estimators
and records ``estimate / (K * nu)``. Replication ``r`` of a cell reads the
words ``[r * stride, r * stride + K * nu)`` of the cell's stream, where
``stride`` is ``K * nu`` rounded up to a whole Philox counter. The ratios
are therefore the same regardless of block size or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtri

from .core import (
    EdfError,
    EstimatorKind,
    adjustment_factor_v1,
    batch_estimates,
    improved_multiplier,
    jr_lambda,
)
from .sampling import RngStream, _check_seed, derive_seed, words_to_uniforms

__all__ = [
    "DEFAULT_REPS",
    "PAPER_K",
    "PAPER_NU",
    "InvalidGrid",
    "EmptySamples",
    "InvalidP",
    "CellError",
    "SimCell",
    "RatioStats",
    "SimSummary",
    "TableRow",
    "quantile",
    "ratio_stats",
    "simulate_ratios",
    "run_cell",
    "run_grid",
    "grid_cells",
    "paper_grid",
]

DEFAULT_REPS = 200_000
PAPER_K = (5, 10, 20, 30, 40, 50, 100)
PAPER_NU = (1, 2, 3, 4, 5, 10, 25)

# normals per block; bounds memory at a few tens of MB
_BLOCK_WORDS = 1 << 20


class InvalidGrid(EdfError):
    code = "InvalidGrid"


class EmptySamples(EdfError):
    code = "EmptySamples"


class InvalidP(EdfError):
    code = "InvalidP"


class CellError(EdfError):
    code = "CellError"


def _is_int(x) -> bool:
    return not isinstance(x, bool) and isinstance(x, (int, np.integer))


@dataclass(frozen=True)
class SimCell:
    k: int
    nu: int
    reps: int = DEFAULT_REPS
    sigma2: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not _is_int(self.k) or self.k < 2:
            raise InvalidGrid(f"k must be an integer >= 2, got {self.k!r}")
        if not _is_int(self.nu) or self.nu < 1:
            raise InvalidGrid(f"nu must be an integer >= 1, got {self.nu!r}")
        if not _is_int(self.reps) or self.reps < 1:
            raise InvalidGrid(f"reps must be an integer >= 1, got {self.reps!r}")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise InvalidGrid(f"sigma2 must be positive and finite, got {self.sigma2!r}")
        try:
            _check_seed(self.seed)
        except ValueError as exc:
            raise InvalidGrid(str(exc)) from None

    @property
    def true_df(self) -> int:
        return self.k * self.nu


@dataclass(frozen=True)
class RatioStats:
    mean: float
    median: float
    q1: float
    q3: float
    se: float  # standard error of the mean ratio


@dataclass(frozen=True)
class SimSummary:
    cell: SimCell
    per_estimator: dict[EstimatorKind, RatioStats]
    ratios: dict[EstimatorKind, np.ndarray] | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class TableRow:
    k: int
    nu: int
    true_df: int
    mean_ratio: float
    median_ratio: float
    upper_q: float
    lower_q: float
    proposed_ratio: float
    improved_ratio: float
    naep_ratio: float

    @classmethod
    def from_summary(cls, summary: SimSummary) -> TableRow:
        stats = summary.per_estimator
        classic = stats[EstimatorKind.SATTERTHWAITE]
        cell = summary.cell
        return cls(
            k=cell.k,
            nu=cell.nu,
            true_df=cell.true_df,
            mean_ratio=classic.mean,
            median_ratio=classic.median,
            upper_q=classic.q3,
            lower_q=classic.q1,
            proposed_ratio=stats[EstimatorKind.PROPOSED_V1].mean,
            improved_ratio=stats[EstimatorKind.IMPROVED].mean,
            naep_ratio=stats[EstimatorKind.NAEP].mean,
        )

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def quantile(samples: Sequence[float] | np.ndarray, p: float) -> float:
    """Linear-interpolation quantile: position ``(n - 1) * p`` in the sorted data."""
    if not 0.0 <= p <= 1.0:
        raise InvalidP(f"p must lie in [0, 1], got {p!r}")
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise EmptySamples("quantile of an empty sample")
    return _sorted_quantile(x, p)


def _sorted_quantile(x: np.ndarray, p: float) -> float:
    pos = (x.size - 1) * p
    lo = math.floor(pos)
    hi = min(lo + 1, x.size - 1)
    frac = pos - lo
    return float(x[lo] + (x[hi] - x[lo]) * frac)


def ratio_stats(ratios: np.ndarray) -> RatioStats:
    x = np.sort(np.asarray(ratios, dtype=np.float64))
    if x.size == 0:
        raise EmptySamples("no ratios to summarize")
    mean = float(np.mean(ratios))
    se = float(np.std(ratios, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return RatioStats(
        mean=mean,
        median=_sorted_quantile(x, 0.5),
        q1=_sorted_quantile(x, 0.25),
        q3=_sorted_quantile(x, 0.75),
        se=se,
    )


def _stride(cell: SimCell) -> int:
    return -(-cell.true_df // 4) * 4


def _block_ratios(cell: SimCell, stream: RngStream, start: int, n: int):
    kv = cell.true_df
    stride = _stride(cell)
    words = stream.words_at(start * stride, n * stride).reshape(n, stride)[:, :kv]
    z = ndtri(words_to_uniforms(words))
    s2 = cell.sigma2 * np.square(z).reshape(n, cell.k, cell.nu).sum(axis=2) / cell.nu
    return {kind: est / kv for kind, est in batch_estimates(s2, cell.nu).items()}


def simulate_ratios(cell: SimCell, workers: int = 1) -> dict[EstimatorKind, np.ndarray]:
    """Per-replication ``estimate / true_df`` for every estimator, in replication order."""
    stream = RngStream(cell.seed)
    per_block = max(1, _BLOCK_WORDS // _stride(cell))
    starts = range(0, cell.reps, per_block)

    def work(start: int):
        return _block_ratios(cell, stream, start, min(per_block, cell.reps - start))

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(work, starts))
    else:
        blocks = [work(s) for s in starts]
    return {kind: np.concatenate([b[kind] for b in blocks]) for kind in EstimatorKind}


def run_cell(cell: SimCell, workers: int = 1, keep_ratios: bool = False) -> SimSummary:
    try:
        ratios = simulate_ratios(cell, workers=workers)
    except EdfError as exc:
        raise CellError(f"K={cell.k} nu={cell.nu}: {exc}") from exc
    stats = {kind: ratio_stats(r) for kind, r in ratios.items()}
    _check_linearity(cell, stats)
    return SimSummary(cell, stats, ratios if keep_ratios else None)


def _check_linearity(cell: SimCell, stats: dict[EstimatorKind, RatioStats]) -> None:
    # equal-df cells: every corrected estimator is a fixed multiple of the classic one
    classic = stats[EstimatorKind.SATTERTHWAITE].mean
    expected = {
        EstimatorKind.NAEP: jr_lambda(cell.k),
        EstimatorKind.PROPOSED_V1: adjustment_factor_v1(cell.nu, cell.k) / cell.nu,
        EstimatorKind.IMPROVED: improved_multiplier(cell.nu, cell.k),
    }
    for kind, factor in expected.items():
        got = stats[kind].mean / classic
        if not math.isclose(got, factor, rel_tol=1e-10):
            raise CellError(
                f"K={cell.k} nu={cell.nu}: {kind} mean ratio is {got!r} x classic, "
                f"expected {factor!r}"
            )


def run_grid(cells: Sequence[SimCell], workers: int = 1) -> list[TableRow]:
    """One table row per cell, in input order.

    Cells run concurrently on up to ``workers`` threads; the rows do not
    depend on the worker count.
    """
    cells = list(cells)
    if not cells:
        raise InvalidGrid("grid must contain at least one cell")

    def work(indexed: tuple[int, SimCell]) -> TableRow:
        i, cell = indexed
        try:
            return TableRow.from_summary(run_cell(cell))
        except EdfError as exc:
            raise CellError(f"cell {i} (K={cell.k}, nu={cell.nu}): {exc}") from exc

    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(work, enumerate(cells)))
    return [work(item) for item in enumerate(cells)]


def grid_cells(
    k_list: Iterable[int],
    nu_list: Iterable[int],
    reps: int = DEFAULT_REPS,
    seed: int = 0,
    sigma2: float = 1.0,
) -> list[SimCell]:
    """Cross product of ``nu_list`` (outer) and ``k_list`` (inner), reference table row order.

    Each cell's seed is hashed from the master seed and the cell's (K, nu),
    so a cell gives the same numbers whatever grid it appears in.
    """
    k_list, nu_list = list(k_list), list(nu_list)
    if not k_list or not nu_list:
        raise InvalidGrid("k and nu lists must be non-empty")
    if reps < 1:
        raise InvalidGrid(f"reps must be >= 1, got {reps!r}")
    try:
        _check_seed(seed)
    except ValueError as exc:
        raise InvalidGrid(str(exc)) from None
    return [
        SimCell(k, nu, reps, sigma2, derive_seed(seed, k, nu))
        for nu in nu_list
        for k in k_list
    ]


def paper_grid(reps: int = DEFAULT_REPS, seed: int = 0, sigma2: float = 1.0) -> list[SimCell]:
    return grid_cells(PAPER_K, PAPER_NU, reps, seed, sigma2)
