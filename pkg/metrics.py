"""
Structural and dynamical statistics of a NetworkSeries.

Positions in the series (0, 1, ...) are the business-day clock: runs and
consecutive-day comparisons use them, so gaps in ingested calendars never
stretch a duration or an interval.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import networkx as nx
import numpy as np
import pandas as pd
from scipy import linalg

from errors import ParameterError, UndefinedMetricError
from model import nm_counts


class Subject(Enum):
    PAIR = 'pair'
    NODE_ACTIVE = 'node'
    NODE_IN = 'node_in'
    NODE_OUT = 'node_out'


@dataclass(frozen=True)
class DurationIntervalSamples:
    subject: Subject
    durations: np.ndarray
    intervals: np.ndarray
    censored: np.ndarray


@dataclass(frozen=True)
class CcdfTable:
    values: np.ndarray
    ccdf: np.ndarray

    def __len__(self):
        return self.values.size

    def survival(self, x):
        """Fraction of samples >= x."""
        idx = np.searchsorted(self.values, x, side='left')
        return float(self.ccdf[idx]) if idx < self.values.size else 0.0

    def to_frame(self):
        return pd.DataFrame({'value': self.values, 'ccdf': self.ccdf})


def ccdf_table(samples):
    """
    Empirical survival function P(X >= x) at each distinct sample value.

    Args:
        samples (array-like): Real samples.

    Returns:
        CcdfTable: Increasing values with nonincreasing ccdf starting at 1.
    """
    data = np.sort(np.asarray(samples, dtype=float))
    if data.size == 0:
        return CcdfTable(values=np.array([]), ccdf=np.array([]))
    values = np.unique(data)
    ccdf = (data.size - np.searchsorted(data, values, side='left')) / data.size
    return CcdfTable(values=values, ccdf=ccdf)


def _positioned_frame(series):
    """Edge frame with an extra ``pos`` column holding the business-day position."""
    frame = series.to_frame()
    positions = {day: pos for pos, day in enumerate(series.days)}
    frame['pos'] = frame['day'].map(positions).astype('int64')
    return frame


def nm_series(series):
    """Per-day active banks N and edges M as a DataFrame (day, n, m)."""
    rows = [(net.day, *nm_counts(net)) for net in series.networks]
    return pd.DataFrame(rows, columns=['day', 'n', 'm'])


def bipartivity(net):
    """
    Spectral bipartivity of one day's network.

    Directions are dropped and reciprocal edges merged; the value is
    sum(cosh(l)) / sum(exp(l)) over the adjacency eigenvalues l.

    Args:
        net (DailyNetwork): A network with at least one edge.

    Returns:
        float: Value in (0.5, 1], equal to 1 for bipartite graphs.

    Raises:
        UndefinedMetricError: If the network has no edges.
    """
    if not net.edges:
        raise UndefinedMetricError(f"Bipartivity is undefined for the empty network of day {net.day}.")
    graph = nx.Graph()
    graph.add_edges_from(net.edges)
    spectrum = linalg.eigh(nx.to_numpy_array(graph), eigvals_only=True, check_finite=False)
    shift = spectrum.max()
    even = np.exp(spectrum - shift) + np.exp(-spectrum - shift)
    return float(even.sum() / (2.0 * np.exp(spectrum - shift).sum()))


def bipartivity_series(series, smoothing_window=20):
    """Per-day bipartivity (NaN on empty days) and its trailing moving average."""
    values = [bipartivity(net) if net.edges else np.nan for net in series.networks]
    frame = pd.DataFrame({'day': series.days, 'bipartivity': values})
    frame['moving_average'] = frame['bipartivity'].rolling(smoothing_window, min_periods=1).mean()
    return frame


def turnover_rate(series):
    """
    Mean Jaccard distance 1 - |I_t & I_t-1| / |I_t | I_t-1| between consecutive active sets.

    A pair with one empty day counts as distance 1; two empty days are skipped.

    Raises:
        UndefinedMetricError: With fewer than two days or no usable pair.
    """
    if series.n_days < 2:
        raise UndefinedMetricError("Turnover needs at least two days.")
    active = [net.active_banks() for net in series.networks]
    distances = []
    for before, after in zip(active, active[1:]):
        union = before | after
        if not union:
            continue
        distances.append(1.0 - len(before & after) / len(union))
    if not distances:
        raise UndefinedMetricError("Turnover is undefined: every day is empty.")
    return float(np.mean(distances))


def _subject_frame(frame, subject):
    """(key, pos) rows marking the days each subject is active."""
    if subject is Subject.PAIR:
        width = int(max(frame['lender'].max(), frame['borrower'].max())) + 1 if len(frame) else 1
        keys = frame['lender'] * width + frame['borrower']
        marks = pd.DataFrame({'key': keys, 'pos': frame['pos']})
    elif subject is Subject.NODE_OUT:
        marks = pd.DataFrame({'key': frame['lender'], 'pos': frame['pos']})
    elif subject is Subject.NODE_IN:
        marks = pd.DataFrame({'key': frame['borrower'], 'pos': frame['pos']})
    else:
        marks = pd.concat([
            pd.DataFrame({'key': frame['lender'], 'pos': frame['pos']}),
            pd.DataFrame({'key': frame['borrower'], 'pos': frame['pos']}),
        ])
    return marks.drop_duplicates().sort_values(['key', 'pos'], kind='mergesort').reset_index(drop=True)


def _runs(marks):
    """Maximal runs of consecutive positions per key: DataFrame key, start, end, length."""
    if marks.empty:
        return pd.DataFrame({'key': [], 'start': [], 'end': [], 'length': []}, dtype='int64')
    new_key = marks['key'].ne(marks['key'].shift())
    gap = marks['pos'].diff().ne(1)
    run_id = (new_key | gap).cumsum()
    grouped = marks.groupby(run_id)
    runs = pd.DataFrame({
        'key': grouped['key'].first(),
        'start': grouped['pos'].min(),
        'end': grouped['pos'].max(),
    }).reset_index(drop=True)
    runs['length'] = runs['end'] - runs['start'] + 1
    return runs


def duration_interval_samples(series, subject=Subject.PAIR):
    """
    Durations (maximal runs of active days) and intervals (idle gaps between runs).

    Runs touching the first or last day of the series are censored: they are
    left out of ``durations`` and reported in ``censored``. Every gap between
    two runs is an interval.

    Args:
        series (NetworkSeries): At least one day.
        subject (Subject or str): Pair, or node activity (any / incoming / outgoing edge).

    Returns:
        DurationIntervalSamples: The samples.
    """
    try:
        subject = Subject(subject)
    except ValueError as e:
        choices = ', '.join(s.value for s in Subject)
        raise ParameterError(f"Unknown subject '{subject}'; choose one of {choices}.") from e
    if series.n_days < 1:
        raise UndefinedMetricError("Durations need at least one day.")
    runs = _runs(_subject_frame(_positioned_frame(series), subject))
    last = series.n_days - 1
    censored = (runs['start'] == 0) | (runs['end'] == last)

    same_key = runs['key'].eq(runs['key'].shift(-1))
    gaps = runs['start'].shift(-1) - runs['end'] - 1
    intervals = gaps[same_key].astype('int64').to_numpy()

    return DurationIntervalSamples(
        subject=subject,
        durations=runs.loc[~censored, 'length'].to_numpy(dtype='int64'),
        intervals=intervals,
        censored=runs.loc[censored, 'length'].to_numpy(dtype='int64'),
    )


def aggregate_degree_curve(series):
    """
    Normalized aggregate degree K(t) / K(T).

    K(t) averages, over all banks active at least once, the number of distinct
    counterparties (either direction) met up to day t.

    Returns:
        pandas.DataFrame: Columns t (day) and k_norm, nondecreasing, ending at 1.

    Raises:
        UndefinedMetricError: If the series has no edges.
    """
    frame = _positioned_frame(series)
    if frame.empty:
        raise UndefinedMetricError("Aggregate degree is undefined for a series without edges.")
    contacts = pd.concat([
        pd.DataFrame({'bank': frame['lender'], 'partner': frame['borrower'], 'pos': frame['pos']}),
        pd.DataFrame({'bank': frame['borrower'], 'partner': frame['lender'], 'pos': frame['pos']}),
    ])
    first_seen = contacts.groupby(['bank', 'partner'])['pos'].min()
    new_per_day = first_seen.value_counts().reindex(range(series.n_days), fill_value=0).sort_index()
    n_banks = contacts['bank'].nunique()
    k = new_per_day.cumsum().to_numpy(dtype=float) / n_banks
    return pd.DataFrame({'t': series.days, 'k_norm': k / k[-1]})


def _daily_degrees(frame):
    """Per (day, bank) in/out degree and strength for banks active that day."""
    out_side = frame.groupby(['day', 'lender']).agg(out_degree=('borrower', 'size'), out_strength=('weight', 'sum'))
    in_side = frame.groupby(['day', 'borrower']).agg(in_degree=('lender', 'size'), in_strength=('weight', 'sum'))
    out_side.index.names = ['day', 'bank']
    in_side.index.names = ['day', 'bank']
    return out_side.join(in_side, how='outer').fillna(0.0)


def degree_distributions(series):
    """
    CCDFs of per-day in- and out-degrees, pooled over days and active banks.

    A bank active only as a borrower contributes out-degree 0, and vice versa.

    Returns:
        tuple: (in CcdfTable, out CcdfTable).
    """
    frame = series.to_frame()
    if frame.empty:
        return ccdf_table([]), ccdf_table([])
    degrees = _daily_degrees(frame)
    return ccdf_table(degrees['in_degree']), ccdf_table(degrees['out_degree'])


def _require_weights(series, what):
    if not series.weighted:
        raise UndefinedMetricError(f"{what} needs a weighted series.")


def strength_vs_degree(series):
    """
    Mean strength for each degree, per direction.

    Strength is the summed weight of a bank's edges on a day (out: lent,
    in: borrowed); pairs are pooled over days.

    Returns:
        pandas.DataFrame: Columns degree, mean_strength, direction ('in' or 'out').

    Raises:
        UndefinedMetricError: For an unweighted series.
    """
    _require_weights(series, "Strength")
    frame = series.to_frame()
    if frame.empty:
        return pd.DataFrame({'degree': [], 'mean_strength': [], 'direction': []})
    degrees = _daily_degrees(frame)
    tables = []
    for direction in ('in', 'out'):
        part = degrees[degrees[f'{direction}_degree'] > 0]
        means = part.groupby(f'{direction}_degree')[f'{direction}_strength'].mean()
        tables.append(pd.DataFrame({
            'degree': means.index.astype('int64'),
            'mean_strength': means.to_numpy(),
            'direction': direction,
        }))
    return pd.concat(tables, ignore_index=True)


def weight_strength_distributions(series):
    """CCDF tables of edge weights, in-strengths and out-strengths (dict keyed weight/in_strength/out_strength)."""
    _require_weights(series, "Weight distributions")
    frame = series.to_frame()
    if frame.empty:
        empty = ccdf_table([])
        return {'weight': empty, 'in_strength': empty, 'out_strength': empty}
    degrees = _daily_degrees(frame)
    return {
        'weight': ccdf_table(frame['weight']),
        'in_strength': ccdf_table(degrees.loc[degrees['in_degree'] > 0, 'in_strength']),
        'out_strength': ccdf_table(degrees.loc[degrees['out_degree'] > 0, 'out_strength']),
    }


def weight_growth_rates(series):
    """
    Growth rates r = log(w_t+1 / w_t) for every pair trading on consecutive days.

    Returns:
        numpy.ndarray: Pooled rates (empty with fewer than two days).
    """
    _require_weights(series, "Weight growth")
    frame = _positioned_frame(series)[['lender', 'borrower', 'pos', 'weight']]
    following = frame.assign(pos=frame['pos'] - 1)
    joined = frame.merge(following, on=['lender', 'borrower', 'pos'], suffixes=('', '_next'))
    return np.log(joined['weight_next'].to_numpy() / joined['weight'].to_numpy())


def activity_fractions(series, window=250):
    """
    Fraction of active days per bank in consecutive full windows.

    Args:
        series (NetworkSeries): The series; its ``bank_ids`` define the banks.
        window (int): Days per window, >= 1. A trailing partial window is dropped.

    Returns:
        pandas.DataFrame: Columns bank, window, f_active, delta_f (change from
        the bank's previous window; NaN for the first).
    """
    if window < 1:
        raise ParameterError(f"window must be >= 1, got {window}.")
    frame = _positioned_frame(series)
    banks = list(series.bank_ids) or sorted(set(frame['lender']) | set(frame['borrower']))
    n_windows = series.n_days // window
    columns = ['bank', 'window', 'f_active', 'delta_f']
    if n_windows == 0 or not banks:
        return pd.DataFrame(columns=columns)

    index = {bank: k for k, bank in enumerate(banks)}
    active = np.zeros((series.n_days, len(banks)), dtype=bool)
    for side in ('lender', 'borrower'):
        active[frame['pos'].to_numpy(), frame[side].map(index).to_numpy()] = True

    usable = active[:n_windows * window].reshape(n_windows, window, len(banks))
    fractions = usable.mean(axis=1)
    deltas = np.vstack([np.full((1, len(banks)), np.nan), np.diff(fractions, axis=0)])
    return pd.DataFrame({
        'bank': np.tile(banks, n_windows),
        'window': np.repeat(np.arange(n_windows), len(banks)),
        'f_active': fractions.ravel(),
        'delta_f': deltas.ravel(),
    })[columns]


def bank_type_fractions(series):
    """Shares of ever-active banks that only lent, only borrowed, or did both."""
    lenders, borrowers = set(), set()
    for net in series.networks:
        for lender, borrower in net.edges:
            lenders.add(lender)
            borrowers.add(borrower)
    banks = lenders | borrowers
    if not banks:
        raise UndefinedMetricError("Bank roles are undefined for a series without edges.")
    return {
        'lender': len(lenders - borrowers) / len(banks),
        'borrower': len(borrowers - lenders) / len(banks),
        'bidirectional': len(lenders & borrowers) / len(banks),
    }


def summary_statistics(series):
    """Headline numbers: days, mean N and M, turnover, mean bipartivity and role shares."""
    counts = nm_series(series)
    stats = {
        'days': series.n_days,
        'mean_n': float(counts['n'].mean()),
        'mean_m': float(counts['m'].mean()),
        'turnover': turnover_rate(series),
        'mean_bipartivity': float(bipartivity_series(series)['bipartivity'].mean()),
    }
    stats.update({f'frac_{role}': share for role, share in bank_type_fractions(series).items()})
    return stats
