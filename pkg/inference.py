"""
Statistical fitting: the M ~ N^beta scaling regression, Weibull rank regression
with an optimal cutoff, discrete power-law maximum likelihood, and the maximum
likelihood estimate of N_P from (N, M) through a simulated conditional histogram.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np
import pandas as pd
from scipy import optimize, special, stats

from errors import DomainError, InsufficientDataError, OutOfRangeError, ParameterError
from metrics import ccdf_table
from model import nm_counts, simulate_series

FLAT_TOLERANCE = 1e-9
MIN_WEIBULL_SAMPLES = 50
MIN_WEIBULL_KEPT = 10
MIN_POWER_LAW_SAMPLES = 50
MAX_EXPONENT = 20.0


@dataclass(frozen=True)
class ScalingFit:
    beta: float
    intercept: float
    r2: float
    n_points: int


@dataclass(frozen=True)
class WeibullFit:
    c: float
    beta_coef: float
    lambda_: float
    n_hat: float
    cutoff: float
    r2: float
    n_used: int


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    x_min: int
    ks: float
    n_tail: int


@dataclass(frozen=True)
class NpEstimate:
    n_p_ml: int
    log_likelihood: float
    flat_flag: bool


@dataclass(frozen=True)
class OutOfRange:
    """Marker for a day whose (N, M) falls outside the histogram."""
    n: int
    m: int


@dataclass(frozen=True)
class ConditionalHistogram:
    n_p_grid: tuple
    w_n: float
    w_m: float
    n_lo: float
    m_lo: float
    prob: np.ndarray
    replicates: int
    smoothing: float
    params_fingerprint: str

    @property
    def n_bins(self):
        return self.prob.shape[1]

    @property
    def m_bins(self):
        return self.prob.shape[2]

    def bin_of(self, n, m):
        """(N-bin, M-bin) indices of a point, or None when it falls outside the grid."""
        i = math.floor((n - self.n_lo) / self.w_n)
        j = math.floor((m - self.m_lo) / self.w_m)
        if 0 <= i < self.n_bins and 0 <= j < self.m_bins:
            return i, j
        return None


def fit_scaling(points):
    """
    Ordinary least squares of log M on log N.

    Args:
        points (iterable): (N, M) pairs; those with N < 2 or M < 1 are dropped.

    Returns:
        ScalingFit: Slope beta, intercept, R^2 and the number of points used.

    Raises:
        InsufficientDataError: With fewer than 3 usable points or a single N value.
    """
    data = np.asarray(list(points), dtype=float).reshape(-1, 2)
    data = data[(data[:, 0] >= 2) & (data[:, 1] >= 1)]
    if len(data) < 3:
        raise InsufficientDataError(f"Scaling fit needs at least 3 points with N >= 2 and M >= 1, got {len(data)}.")
    log_n, log_m = np.log(data[:, 0]), np.log(data[:, 1])
    if np.ptp(log_n) == 0:
        raise InsufficientDataError("Scaling fit is degenerate: every point has the same N.")
    result = stats.linregress(log_n, log_m)
    return ScalingFit(beta=float(result.slope), intercept=float(result.intercept),
                      r2=float(result.rvalue ** 2), n_points=len(data))


def weibull_ccdf(c, lam, x):
    """exp(-(x / lam)^c); works elementwise on arrays."""
    if c <= 0 or lam <= 0:
        raise DomainError(f"Weibull CCDF needs c, lambda > 0, got c={c}, lambda={lam}.")
    return np.exp(-np.power(np.asarray(x, dtype=float) / lam, c))


def default_n_hat_grid(n_samples, min_rank=20, steps=50):
    """Log-rank cutoffs from log(min_rank) to log(n_samples) in even steps."""
    return np.linspace(math.log(min_rank), math.log(n_samples), steps)


def _suffix_sum(values):
    """Sums over positions k..end for every k."""
    return np.cumsum(values[::-1])[::-1]


def fit_weibull_rank(samples, c_grid, n_hat_grid=None):
    """
    Weibull fit by rank regression with an optimal cutoff.

    Samples are ranked from the largest (rank 1); ties share the largest rank of
    the group so n_x / N_X is the empirical P(X >= x). For every shape c and
    log-rank cutoff n_hat, x^c is regressed through the origin on
    log N_X - log n_x using only ranks >= e^n_hat. The pair with the highest
    centered R^2 wins; cutoffs keeping fewer than 10 samples are skipped.

    Args:
        samples (array-like): Positive values, at least 50.
        c_grid (array-like): Shapes in (0, 1).
        n_hat_grid (array-like, optional): Log-rank cutoffs. Default spans
            log 20 to log N_X in 50 steps.

    Returns:
        WeibullFit: c, beta = lambda^c, lambda, the chosen cutoff and its R^2.

    Raises:
        InsufficientDataError: Too few samples, zero variance, or no usable cutoff.
        ParameterError: On an empty or out-of-range grid.
    """
    x = np.sort(np.asarray(samples, dtype=float))[::-1]
    if x.size < MIN_WEIBULL_SAMPLES:
        raise InsufficientDataError(f"Weibull fit needs at least {MIN_WEIBULL_SAMPLES} samples, got {x.size}.")
    if np.any(x <= 0):
        raise ParameterError("Weibull fit needs positive samples.")
    if np.ptp(x) == 0:
        raise InsufficientDataError("Weibull fit is degenerate: all samples are equal.")

    c_grid = np.asarray(c_grid, dtype=float)
    if c_grid.size == 0 or np.any((c_grid <= 0) | (c_grid >= 1)):
        raise ParameterError("c_grid must be a nonempty list of values in (0, 1).")
    total = x.size
    n_hat_grid = default_n_hat_grid(total) if n_hat_grid is None else np.asarray(n_hat_grid, dtype=float)
    if n_hat_grid.size == 0:
        raise ParameterError("n_hat grid is empty.")

    ascending = x[::-1]
    ranks = total - np.searchsorted(ascending, x, side='left')
    z = np.log(total) - np.log(ranks)

    starts = np.ceil(np.exp(n_hat_grid)).astype(np.int64) - 1
    kept = total - starts
    usable = kept >= MIN_WEIBULL_KEPT
    if not np.any(usable):
        raise InsufficientDataError("No cutoff leaves at least 10 samples for the Weibull fit.")
    idx = starts[usable]
    s_zz = _suffix_sum(z * z)[idx]

    r2 = np.full((c_grid.size, n_hat_grid.size), np.nan)
    slopes = np.full((c_grid.size, n_hat_grid.size), np.nan)
    for k, c in enumerate(c_grid):
        y = np.power(x, c)
        s_zy = _suffix_sum(y * z)[idx]
        s_y = _suffix_sum(y)[idx]
        s_yy = _suffix_sum(y * y)[idx]
        with np.errstate(divide='ignore', invalid='ignore'):
            ss_res = s_yy - s_zy ** 2 / s_zz
            ss_tot = s_yy - s_y ** 2 / kept[usable]
            r2[k, usable] = np.where((ss_tot > 0) & (s_zz > 0), 1.0 - ss_res / ss_tot, np.nan)
            slopes[k, usable] = s_zy / s_zz
    if np.all(np.isnan(r2)):
        raise InsufficientDataError("Weibull fit is degenerate at every cutoff.")

    ci, ni = np.unravel_index(np.nanargmax(r2), r2.shape)
    start = starts[ni]
    c = float(c_grid[ci])
    beta_coef = float(slopes[ci, ni])
    return WeibullFit(
        c=c, beta_coef=beta_coef, lambda_=beta_coef ** (1.0 / c),
        n_hat=float(n_hat_grid[ni]), cutoff=float(x[start]),
        r2=float(r2[ci, ni]), n_used=int(kept[ni]),
    )


def weibull_ccdf_deviation(fit, samples):
    """Largest |empirical P(X >= x) - fitted CCDF| over sample values up to the cutoff."""
    table = ccdf_table(samples)
    below = table.values <= fit.cutoff
    if not np.any(below):
        raise InsufficientDataError("No samples at or below the Weibull cutoff.")
    fitted = weibull_ccdf(fit.c, fit.lambda_, table.values[below])
    return float(np.max(np.abs(table.ccdf[below] - fitted)))


def discrete_power_law_loglik(exponent, samples, x_min):
    """Mean log-likelihood of the samples >= x_min under p(x) = x^-exponent / zeta(exponent, x_min)."""
    if exponent <= 1:
        raise DomainError(f"Power-law exponent must exceed 1, got {exponent}.")
    tail = np.asarray(samples, dtype=float)
    tail = tail[tail >= x_min]
    if tail.size == 0:
        raise InsufficientDataError(f"No samples at or above x_min={x_min}.")
    return float(-exponent * np.log(tail).mean() - np.log(special.zeta(exponent, x_min)))


def _power_law_exponent(mean_log, x_min):
    """Exponent maximizing the mean log-likelihood for a tail with the given mean log."""
    result = optimize.minimize_scalar(
        lambda s: s * mean_log + np.log(special.zeta(s, x_min)),
        bounds=(1.0 + 1e-6, MAX_EXPONENT), method='bounded', options={'xatol': 1e-10},
    )
    return float(result.x)


def _power_law_ks(tail, exponent, x_min):
    values, counts = np.unique(tail, return_counts=True)
    empirical = np.cumsum(counts) / tail.size
    model = 1.0 - special.zeta(exponent, values + 1.0) / special.zeta(exponent, x_min)
    return float(np.max(np.abs(empirical - model)))


def fit_power_law(samples, min_tail=50):
    """
    Discrete power-law fit with x_min chosen by the Kolmogorov-Smirnov distance.

    Every observed value leaving at least ``min_tail`` samples (with two distinct
    values) at or above it is a candidate x_min; the exponent maximizes the
    zeta-normalized likelihood of that tail. Ties in KS keep the smallest x_min.

    Args:
        samples (array-like): Positive integers, at least 50.
        min_tail (int, optional): Smallest tail size considered.

    Returns:
        PowerLawFit: Exponent, x_min, KS distance and tail size.

    Raises:
        InsufficientDataError: Too few samples or a support narrower than [min, 2 min).
    """
    data = np.asarray(samples)
    if data.size < MIN_POWER_LAW_SAMPLES:
        raise InsufficientDataError(f"Power-law fit needs at least {MIN_POWER_LAW_SAMPLES} samples, got {data.size}.")
    if np.any(data < 1) or np.any(data != np.round(data)):
        raise ParameterError("Power-law fit needs positive integer samples.")
    data = np.sort(data.astype(np.int64))
    if data[-1] < 2 * data[0]:
        raise InsufficientDataError(
            f"Power-law support too narrow: max {data[-1]} < 2 * min {data[0]}.")

    logs = np.log(data.astype(float))
    suffix_log = np.cumsum(logs[::-1])[::-1]
    best = None
    for x_min in np.unique(data):
        start = int(np.searchsorted(data, x_min, side='left'))
        n_tail = data.size - start
        if n_tail < min_tail or data[-1] == x_min:
            continue
        exponent = _power_law_exponent(suffix_log[start] / n_tail, int(x_min))
        ks = _power_law_ks(data[start:], exponent, int(x_min))
        if best is None or ks < best.ks:
            best = PowerLawFit(exponent=exponent, x_min=int(x_min), ks=ks, n_tail=int(n_tail))
    if best is None:
        raise InsufficientDataError(f"No x_min leaves a tail of at least {min_tail} samples.")
    return best


def fit_growth_exponent(curve, trim=0.1):
    """
    Exponent gamma of K(t) ~ t^gamma over the middle of the curve.

    Args:
        curve (pandas.DataFrame): Output of metrics.aggregate_degree_curve.
        trim (float, optional): Fraction dropped at each end.

    Returns:
        float: The log-log OLS slope against elapsed days (1, 2, ...).
    """
    if not 0 <= trim < 0.5:
        raise ParameterError(f"trim must be in [0, 0.5), got {trim}.")
    k = np.asarray(curve['k_norm'], dtype=float)
    elapsed = np.arange(1, k.size + 1, dtype=float)
    lo, hi = int(math.floor(trim * k.size)), int(math.ceil((1.0 - trim) * k.size))
    k, elapsed = k[lo:hi], elapsed[lo:hi]
    keep = k > 0
    if np.count_nonzero(keep) < 3:
        raise InsufficientDataError("Growth exponent needs at least 3 positive points.")
    return float(stats.linregress(np.log(elapsed[keep]), np.log(k[keep])).slope)


def _nm_cell(params, n_p, days, burn_in, seed):
    """(day, N, M) rows of one unweighted run at ``n_p``."""
    cell_params = replace(params, n_p=n_p, burn_in=burn_in, horizon=burn_in + days)
    series = simulate_series(cell_params, seed=seed, weighted=False, fast_burn_in=True)
    return [(net.day, *nm_counts(net)) for net in series.networks]


def _run_cells(cells, workers, progress):
    """Evaluate _nm_cell over (key, args) cells; results come back keyed and sorted."""
    results = {}
    if workers <= 1:
        for key, args in cells:
            results[key] = _nm_cell(*args)
            if progress is not None:
                progress.update(1)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {key: executor.submit(_nm_cell, *args) for key, args in cells}
            for key, future in futures.items():
                results[key] = future.result()
                if progress is not None:
                    progress.update(1)
    return dict(sorted(results.items()))


def scaling_sweep(n_p_grid, params, days, seed=0, workers=1, progress=None):
    """
    Daily (N, M) of unweighted runs across an N_P grid.

    Each grid value runs burn_in activity-only days and ``days`` sampled days
    with seed [seed, n_p].

    Returns:
        pandas.DataFrame: Columns n_p, day, n, m ordered by n_p then day.
    """
    grid = sorted({int(v) for v in n_p_grid})
    if not grid or grid[0] < 1:
        raise ParameterError("Sweep grid must hold positive N_P values.")
    if days < 1:
        raise ParameterError(f"Sweep days must be >= 1, got {days}.")
    cells = [(n_p, (params, n_p, days, params.burn_in, [seed, n_p])) for n_p in grid]
    results = _run_cells(cells, workers, progress)
    rows = [(n_p, day, n, m) for n_p, cell in results.items() for day, n, m in cell]
    return pd.DataFrame(rows, columns=['n_p', 'day', 'n', 'm'])


def params_fingerprint(params, days, burn_in):
    """Stable text descriptor of the model parameters behind a histogram."""
    parts = [f"{f.name}={getattr(params, f.name)}" for f in fields(params)
             if f.name not in ('n_p', 'horizon', 'burn_in')]
    return ';'.join(parts + [f"days={days}", f"burn_in={burn_in}"])


def build_conditional_histogram(n_p_grid, params, replicates, bin_widths, smoothing=1.0, seed=0,
                                days=1, burn_in=None, workers=1, progress=None):
    """
    Smoothed conditional probability f(N-bin, M-bin | N_P) from simulation.

    Every (N_P, replicate) cell is an independent unweighted run seeded with
    [seed, n_p, replicate] that keeps ``days`` days after an activity-only
    burn-in. Bins start at multiples of the widths and span all simulated
    points. Smoothing spreads ``smoothing`` extra mass evenly over all bins of
    each N_P before normalizing.

    Args:
        n_p_grid (iterable): N_P values.
        params (ModelParams): Model parameters (n_p and horizon are replaced).
        replicates (int): Runs per N_P.
        bin_widths (tuple): (w_N, w_M), both > 0.
        smoothing (float, optional): Additive mass, >= 0.
        seed (int, optional): Master seed.
        days (int, optional): Days kept per run.
        burn_in (int, optional): Activity-only days per run; defaults to params.burn_in.
        workers (int, optional): Worker processes.
        progress (optional): Object with ``update(n)`` called once per finished cell.

    Returns:
        ConditionalHistogram: The histogram.
    """
    grid = sorted({int(v) for v in n_p_grid})
    w_n, w_m = (float(w) for w in bin_widths)
    if not grid or grid[0] < 1:
        raise ParameterError("Histogram grid must hold positive N_P values.")
    if w_n <= 0 or w_m <= 0:
        raise ParameterError(f"Bin widths must be positive, got ({w_n}, {w_m}).")
    if smoothing < 0:
        raise ParameterError(f"smoothing must be >= 0, got {smoothing}.")
    if replicates < 1 or days < 1:
        raise ParameterError("replicates and days must be >= 1.")
    burn_in = params.burn_in if burn_in is None else int(burn_in)

    cells = [((n_p, rep), (params, n_p, days, burn_in, [seed, n_p, rep]))
             for n_p in grid for rep in range(replicates)]
    results = _run_cells(cells, workers, progress)

    points = {n_p: [] for n_p in grid}
    for (n_p, _), cell in results.items():
        points[n_p].extend((n, m) for _, n, m in cell)
    every = np.array([p for cell in points.values() for p in cell], dtype=float)
    n_lo = math.floor(every[:, 0].min() / w_n) * w_n
    m_lo = math.floor(every[:, 1].min() / w_m) * w_m
    n_bins = int(math.floor((every[:, 0].max() - n_lo) / w_n)) + 1
    m_bins = int(math.floor((every[:, 1].max() - m_lo) / w_m)) + 1

    prob = np.empty((len(grid), n_bins, m_bins))
    for k, n_p in enumerate(grid):
        cloud = np.array(points[n_p], dtype=float)
        counts, _, _ = np.histogram2d(
            np.floor((cloud[:, 0] - n_lo) / w_n), np.floor((cloud[:, 1] - m_lo) / w_m),
            bins=(n_bins, m_bins), range=((-0.5, n_bins - 0.5), (-0.5, m_bins - 0.5)),
        )
        smoothed = counts + smoothing / counts.size
        prob[k] = smoothed / smoothed.sum()

    return ConditionalHistogram(
        n_p_grid=tuple(grid), w_n=w_n, w_m=w_m, n_lo=float(n_lo), m_lo=float(m_lo),
        prob=prob, replicates=int(replicates), smoothing=float(smoothing),
        params_fingerprint=params_fingerprint(params, days, burn_in),
    )


def estimate_np(hist, n, m):
    """
    N_P maximizing the histogram probability of the bin holding (n, m).

    Values within a relative 1e-9 of the maximum tie: the smallest tied N_P is
    returned and flat_flag is set.

    Raises:
        OutOfRangeError: If (n, m) falls outside the binned range.
    """
    cell = hist.bin_of(n, m)
    if cell is None:
        raise OutOfRangeError(f"(N={n}, M={m}) is outside the histogram range.")
    column = hist.prob[:, cell[0], cell[1]]
    order = np.argsort(hist.n_p_grid, kind='mergesort')
    grid = np.asarray(hist.n_p_grid)[order]
    column = column[order]
    best = column.max()
    tied = np.flatnonzero(column >= best * (1.0 - FLAT_TOLERANCE))
    return NpEstimate(
        n_p_ml=int(grid[tied[0]]),
        log_likelihood=float(np.log(best)) if best > 0 else -math.inf,
        flat_flag=bool(tied.size > 1),
    )


def estimate_np_series(hist, series):
    """Per-day estimates as (day, NpEstimate or OutOfRange) pairs; out-of-range days are kept."""
    estimates = []
    for net in series.networks:
        n, m = nm_counts(net)
        try:
            estimates.append((net.day, estimate_np(hist, n, m)))
        except OutOfRangeError:
            estimates.append((net.day, OutOfRange(n=n, m=m)))
    return estimates
