"""Monte Carlo lower bounds on expected improvement per offspring.

For a parent at off-diagonal defect count d1 from the optimum (and, for the
edit-path crossover, a co-parent at distance d2 from parent 1), each
estimator averages max(improvement, 0) over sampled offspring outcomes:

* sepx: edit-path crossover; deterministic gain d1*d2/denominator minus a
  Binomial(d2, 1/2) count of inherited defects.
* stdx: standard crossover at a uniformly random alignment.
* muta: pointwise mutation at rate p_m, by default 1/(n(n-1)).

Two conventions exist for the sepx denominator because the shared-entry
count can be written against all n^2 entries or only the n(n-1) off-diagonal
ones. `as_stated` keeps the n^2 form and yields NaN where the denominator is
nonpositive; `consistent` uses the off-diagonal form, whose denominator
reduces to min(d1 + d2, n(n-1)) and is always positive for d1, d2 >= 1.

Grids derive one substream per (seed, d1, d2) cell and feed the same
uniforms to all three estimators (common random numbers), so difference
maps are low-noise and results do not depend on cell scheduling order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binom

from .rng import DEFAULT_SEED, substream

__all__ = [
    "SpaceParams",
    "SPACES",
    "LbeiGrid",
    "NSE_MODES",
    "DEFAULT_TRIALS",
    "mean_random_disagreement",
    "default_d_max",
    "lbei_sepx",
    "lbei_stdx",
    "lbei_muta",
    "lbei_grid",
]

NSE_MODES = ("consistent", "as_stated")
DEFAULT_TRIALS = 100_000


@dataclass(frozen=True)
class SpaceParams:
    """Edge-count profile of a search space at fixed order n.

    n_opt_1, n_1_1 and n_2_1 are the off-diagonal ones counts (edge counts)
    of the optimum, parent 1 and parent 2; the zero counts are derived.
    """

    n: int
    n_opt_1: int
    n_1_1: int
    n_2_1: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"order must be at least 2, got {self.n}")
        for name in ("n_opt_1", "n_1_1", "n_2_1"):
            value = getattr(self, name)
            if not 0 <= value <= self.pairs:
                raise ValueError(f"{name} must lie in [0, {self.pairs}], got {value}")

    @property
    def pairs(self) -> int:
        return self.n * (self.n - 1)

    @property
    def n_opt_0(self) -> int:
        return self.pairs - self.n_opt_1

    @property
    def n_1_0(self) -> int:
        return self.pairs - self.n_1_1

    @property
    def n_2_0(self) -> int:
        return self.pairs - self.n_2_1


SPACES = {
    "nas101": SpaceParams(n=7, n_opt_1=9, n_1_1=9, n_2_1=9),
    "nasnlp": SpaceParams(n=12, n_opt_1=14, n_1_1=11, n_2_1=11),
}


def mean_random_disagreement(sp: SpaceParams) -> float:
    """Expected off-diagonal disagreement between randomly aligned members.

    Also the binomial trial count of the standard-crossover bound, before
    rounding.
    """
    return (sp.n_1_1 * sp.n_2_0 + sp.n_1_0 * sp.n_2_1) / sp.pairs


def default_d_max(sp: SpaceParams) -> int:
    """Default upper end of the d1/d2 grid axes.

    Distances beyond the random-alignment disagreement level describe
    parents worse than chance, so the grids cover [0, that level] unless a
    range is given explicitly.
    """
    return round(mean_random_disagreement(sp))


@lru_cache(maxsize=1024)
def _binom_cdf(count: int, p: float) -> np.ndarray:
    return binom.cdf(np.arange(count + 1), count, p)


def _binomial_from_uniforms(u: np.ndarray, count: int, p: float) -> np.ndarray:
    """Invert uniforms through a binomial CDF, preserving the coupling."""
    if count == 0 or p == 0.0:
        return np.zeros(u.shape, dtype=np.int64)
    if p == 1.0:
        return np.full(u.shape, count, dtype=np.int64)
    cdf = _binom_cdf(count, float(p))
    return np.minimum(np.searchsorted(cdf, u, side="left"), count)


def _sepx_values(d1: int, d2: int, sp: SpaceParams, u1: np.ndarray, nse_mode: str) -> np.ndarray:
    if d1 == 0 or d2 == 0:
        return np.zeros(u1.size)
    if nse_mode == "as_stated":
        n_se = max(sp.n**2 - d1 - d2, 0)
    else:
        n_se = max(sp.pairs - d1 - d2, 0)
    denom = sp.pairs - n_se
    if denom <= 0:
        return np.full(u1.size, np.nan)
    deterministic = d1 * d2 / denom
    b = _binomial_from_uniforms(u1, d2, 0.5)
    return np.maximum(deterministic - b, 0.0)


def _stdx_values(d1: int, sp: SpaceParams, u1: np.ndarray) -> np.ndarray:
    bracket = (
        (d1 + sp.n_1_1 - sp.n_opt_1) * sp.n_2_1 + (d1 + sp.n_1_0 - sp.n_opt_0) * sp.n_2_0
    ) / (2 * sp.pairs)
    count = round(mean_random_disagreement(sp))
    b = _binomial_from_uniforms(u1, count, 0.5)
    return np.maximum(d1 - bracket - b, 0.0)


def _muta_values(d1: int, sp: SpaceParams, p_m: float, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    b1 = _binomial_from_uniforms(u1, sp.pairs - d1, p_m)
    b2 = _binomial_from_uniforms(u2, d1, 1.0 - p_m)
    return np.maximum(d1 - b1 - b2, 0.0)


def _summarize(values: np.ndarray) -> tuple[float, float]:
    return float(values.mean()), float(values.std() / math.sqrt(values.size))


def _check_distance(value: int, sp: SpaceParams, name: str) -> int:
    value = int(value)
    if not 0 <= value <= sp.pairs:
        raise ValueError(f"{name} must lie in [0, {sp.pairs}], got {value}")
    return value


def _check_trials(trials: int) -> int:
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    return int(trials)


def _check_mode(nse_mode: str) -> str:
    if nse_mode not in NSE_MODES:
        raise ValueError(f"nse_mode must be one of {NSE_MODES}, got {nse_mode!r}")
    return nse_mode


def _check_p_m(p_m: float | None, sp: SpaceParams) -> float:
    if p_m is None:
        return 1.0 / sp.pairs
    if not 0.0 < p_m <= 1.0:
        raise ValueError(f"p_m must lie in (0, 1], got {p_m}")
    return float(p_m)


def lbei_sepx(
    d1: int,
    d2: int,
    sp: SpaceParams,
    trials: int = DEFAULT_TRIALS,
    rng: np.random.Generator | None = None,
    nse_mode: str = "consistent",
) -> tuple[float, float]:
    """Estimate the edit-path crossover bound at one (d1, d2) cell.

    Returns (estimate, standard error); both are NaN for `as_stated` cells
    whose denominator is nonpositive.
    """
    d1 = _check_distance(d1, sp, "d1")
    d2 = _check_distance(d2, sp, "d2")
    trials = _check_trials(trials)
    _check_mode(nse_mode)
    if rng is None:
        rng = substream(DEFAULT_SEED, "lbei-sepx")
    return _summarize(_sepx_values(d1, d2, sp, rng.random(trials), nse_mode))


def lbei_stdx(
    d1: int,
    sp: SpaceParams,
    trials: int = DEFAULT_TRIALS,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Estimate the standard-crossover bound at defect count d1."""
    d1 = _check_distance(d1, sp, "d1")
    trials = _check_trials(trials)
    if rng is None:
        rng = substream(DEFAULT_SEED, "lbei-stdx")
    return _summarize(_stdx_values(d1, sp, rng.random(trials)))


def lbei_muta(
    d1: int,
    sp: SpaceParams,
    p_m: float | None = None,
    trials: int = DEFAULT_TRIALS,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Estimate the mutation bound at defect count d1."""
    d1 = _check_distance(d1, sp, "d1")
    p_m = _check_p_m(p_m, sp)
    trials = _check_trials(trials)
    if rng is None:
        rng = substream(DEFAULT_SEED, "lbei-muta")
    return _summarize(_muta_values(d1, sp, p_m, rng.random(trials), rng.random(trials)))


@dataclass(frozen=True)
class LbeiGrid:
    """Estimates of all three bounds over a (d1, d2) grid.

    The mutation and standard-crossover bounds depend on d1 only but are
    estimated per cell with that cell's draws, so difference maps against
    the sepx column stay paired.
    """

    space: SpaceParams
    d1_values: tuple[int, ...]
    d2_values: tuple[int, ...]
    trials: int
    nse_mode: str
    sepx: np.ndarray
    se_sepx: np.ndarray
    stdx: np.ndarray
    se_stdx: np.ndarray
    muta: np.ndarray
    se_muta: np.ndarray

    def write_csv(self, sink) -> None:
        """Write rows d1-major with columns:

        d1,d2,lbei_sepx,se_sepx,lbei_stdx,se_stdx,lbei_muta,se_muta
        """
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(
            ["d1", "d2", "lbei_sepx", "se_sepx", "lbei_stdx", "se_stdx", "lbei_muta", "se_muta"]
        )
        for i, d1 in enumerate(self.d1_values):
            for j, d2 in enumerate(self.d2_values):
                writer.writerow(
                    [
                        d1,
                        d2,
                        str(float(self.sepx[i, j])),
                        str(float(self.se_sepx[i, j])),
                        str(float(self.stdx[i, j])),
                        str(float(self.se_stdx[i, j])),
                        str(float(self.muta[i, j])),
                        str(float(self.se_muta[i, j])),
                    ]
                )

    def diff_cell_counts(self, a: str, b: str) -> tuple[int, int, int]:
        """Sign counts of (a - b) over the interior cells d1 >= 1, d2 >= 1.

        Returns (nonnegative, nonpositive, total); NaN differences count in
        neither sign bucket.
        """
        rows = [i for i, d1 in enumerate(self.d1_values) if d1 >= 1]
        cols = [j for j, d2 in enumerate(self.d2_values) if d2 >= 1]
        diff = (getattr(self, a) - getattr(self, b))[np.ix_(rows, cols)]
        return int(np.sum(diff >= 0)), int(np.sum(diff <= 0)), diff.size


def lbei_grid(
    sp: SpaceParams,
    d1_range: Iterable[int] | None = None,
    d2_range: Iterable[int] | None = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    nse_mode: str = "consistent",
    p_m: float | None = None,
) -> LbeiGrid:
    """Tabulate all three estimators over a (d1, d2) grid.

    Axes default to 0..default_d_max(sp). Each cell draws from the
    substream (seed, "lbei", d1, d2), shared across estimators.
    """
    trials = _check_trials(trials)
    _check_mode(nse_mode)
    p_m = _check_p_m(p_m, sp)
    if d1_range is None:
        d1_range = range(default_d_max(sp) + 1)
    if d2_range is None:
        d2_range = range(default_d_max(sp) + 1)
    d1s = tuple(_check_distance(d, sp, "d1") for d in d1_range)
    d2s = tuple(_check_distance(d, sp, "d2") for d in d2_range)

    shape = (len(d1s), len(d2s))
    arrays = {name: np.zeros(shape) for name in ("sepx", "se_sepx", "stdx", "se_stdx", "muta", "se_muta")}
    for i, d1 in enumerate(d1s):
        for j, d2 in enumerate(d2s):
            rng = substream(seed, "lbei", d1, d2)
            u1 = rng.random(trials)
            u2 = rng.random(trials)
            arrays["sepx"][i, j], arrays["se_sepx"][i, j] = _summarize(
                _sepx_values(d1, d2, sp, u1, nse_mode)
            )
            arrays["stdx"][i, j], arrays["se_stdx"][i, j] = _summarize(_stdx_values(d1, sp, u1))
            arrays["muta"][i, j], arrays["se_muta"][i, j] = _summarize(
                _muta_values(d1, sp, p_m, u1, u2)
            )
    return LbeiGrid(
        space=sp,
        d1_values=d1s,
        d2_values=d2s,
        trials=trials,
        nse_mode=nse_mode,
        **arrays,
    )
