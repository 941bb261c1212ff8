import os
import numpy as np
import pandas as pd
from config import RunConfig, default_values, load_config_file
from errors import ConsistencyError, DataFormatError
from model import BankType, DailyNetwork, Ingested, NetworkSeries, Simulated
from inference import ConditionalHistogram

SERIES_COLUMNS = ['day', 'lender', 'borrower', 'weight']
HIST_COLUMNS = ['n_p', 'n_bin_lo', 'm_bin_lo', 'prob']
BANK_COLUMNS = ['bank', 'label', 'type']
ESTIMATE_COLUMNS = ['day', 'n', 'm', 'n_p_ml', 'log_likelihood', 'flat', 'in_range']
FLOAT_FORMAT = '%.12g'


def manifest_path(path):
    return f"{path}.manifest"


def banks_path(path):
    return f"{path}.banks.csv"


def _format_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_manifest(path, config, meta):
    """
    Write ``<path>.manifest``: the effective configuration followed by ``meta.*`` lines.

    Args:
        path (str): Output the manifest describes.
        config (RunConfig): Effective configuration.
        meta (dict): Facts about the output (kind, command, sizes...).
    """
    lines = [f"# manifest of {os.path.basename(path)}"]
    lines += [f"{key}={_format_value(value)}" for key, value in config.items()]
    lines += [f"meta.{key}={_format_value(value)}" for key, value in sorted(meta.items())]
    with open(manifest_path(path), 'w', encoding='utf-8') as file:
        file.write('\n'.join(lines) + '\n')


def read_manifest(path):
    """
    Read the manifest next to ``path``.

    Returns:
        tuple: (RunConfig or None, dict of meta strings). Both empty when no manifest exists.
    """
    target = manifest_path(path)
    if not os.path.exists(target):
        return None, {}
    values = default_values()
    values.update(load_config_file(target))
    meta = {}
    with open(target, 'r', encoding='utf-8') as file:
        for line in file:
            key, sep, value = line.strip().partition('=')
            if sep and key.startswith('meta.'):
                meta[key[len('meta.'):]] = value
    return RunConfig(values), meta


def _read_csv(path, columns, what):
    try:
        frame = pd.read_csv(path)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataFormatError(f"Cannot read {what} '{path}': {e}") from e
    if list(frame.columns) != columns:
        raise DataFormatError(f"{what.capitalize()} '{path}' must have header {','.join(columns)}, "
                              f"got {','.join(map(str, frame.columns))}.")
    return frame


def write_table(frame, path):
    """Write a DataFrame as UTF-8 CSV with a deterministic float format."""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def write_series(series, path, config, command):
    """
    Write a series CSV, its bank table and its manifest.

    Days without edges have no rows; the manifest's first_day and n_days restore them.
    """
    write_table(series.to_frame(), path)

    labels = getattr(series.provenance, 'bank_labels', ())
    types = series.bank_types or {}
    bank_rows = [
        (bank, labels[bank - 1] if labels else '', types[bank].value if bank in types else '')
        for bank in series.bank_ids
    ]
    write_table(pd.DataFrame(bank_rows, columns=BANK_COLUMNS), banks_path(path))

    meta = {
        'command': command,
        'kind': 'simulated' if isinstance(series.provenance, Simulated) else 'ingested',
        'n_days': series.n_days,
        'first_day': series.first_day if series.n_days else 0,
        'n_banks': len(series.bank_ids),
        'weighted': series.weighted,
    }
    dates = getattr(series.provenance, 'dates', ())
    if dates:
        meta['first_date'] = dates[0]
        meta['last_date'] = dates[-1]
    write_manifest(path, config, meta)


def _read_banks(path):
    target = banks_path(path)
    if not os.path.exists(target):
        return (), (), None
    frame = pd.read_csv(target, dtype=str, keep_default_na=False)
    if list(frame.columns) != BANK_COLUMNS:
        raise DataFormatError(f"Bank table '{target}' must have header {','.join(BANK_COLUMNS)}.")
    try:
        ids = tuple(int(b) for b in frame['bank'])
        types = {b: BankType(t) for b, t in zip(ids, frame['type']) if t}
    except ValueError as e:
        raise DataFormatError(f"Bad bank table '{target}': {e}") from e
    labels = tuple(frame['label']) if (frame['label'] != '').all() else ()
    return ids, labels, types or None


def read_series(path):
    """
    Read a series written by write_series (or any CSV with the series header).

    Returns:
        NetworkSeries: The series; provenance is Simulated when the manifest says so.

    Raises:
        DataFormatError: On a bad header, bad values, self-loops or nonpositive weights.
    """
    frame = _read_csv(path, SERIES_COLUMNS, 'series')
    try:
        frame = frame.astype({'day': 'int64', 'lender': 'int64', 'borrower': 'int64', 'weight': 'float64'})
    except (ValueError, TypeError) as e:
        raise DataFormatError(f"Series '{path}' holds non-numeric values: {e}") from e
    if frame.isna().any().any():
        raise DataFormatError(f"Series '{path}' has missing values.")

    config, meta = read_manifest(path)
    bank_ids, labels, bank_types = _read_banks(path)

    if 'n_days' in meta:
        first, n_days = int(meta['first_day']), int(meta['n_days'])
        days = list(range(first, first + n_days))
    else:
        days = sorted(frame['day'].unique().tolist())
    weighted = meta.get('weighted', 'true') == 'true'

    by_day = {day: group for day, group in frame.groupby('day', sort=True)}
    unknown = set(by_day) - set(days)
    if unknown:
        raise DataFormatError(f"Series '{path}' has rows for days outside its manifest range: {sorted(unknown)[:5]}.")

    networks = []
    try:
        for day in days:
            group = by_day.get(day)
            edges = {} if group is None else {
                (int(l), int(b)): float(w)
                for l, b, w in zip(group['lender'], group['borrower'], group['weight'])
            }
            if group is not None and len(edges) != len(group):
                raise DataFormatError(f"Series '{path}' repeats a pair on day {day}.")
            networks.append(DailyNetwork(day=day, edges=edges, weighted=weighted))
    except ConsistencyError as e:
        raise DataFormatError(f"Series '{path}': {e}") from e

    if not bank_ids:
        bank_ids = tuple(sorted(set(frame['lender']) | set(frame['borrower'])))
    if meta.get('kind') == 'simulated' and config is not None:
        provenance = Simulated(config.model_params(), config.weight_params() if weighted else None, config['seed'])
    else:
        provenance = Ingested(source=path, bank_labels=labels)
    return NetworkSeries(networks=networks, provenance=provenance, bank_ids=bank_ids, bank_types=bank_types)


def write_histogram(hist, path, config):
    """Write a histogram as ``n_p,n_bin_lo,m_bin_lo,prob`` rows plus a manifest carrying its geometry."""
    k, i, j = np.meshgrid(np.arange(len(hist.n_p_grid)), np.arange(hist.n_bins), np.arange(hist.m_bins),
                          indexing='ij')
    frame = pd.DataFrame({
        'n_p': np.asarray(hist.n_p_grid)[k.ravel()],
        'n_bin_lo': hist.n_lo + hist.w_n * i.ravel(),
        'm_bin_lo': hist.m_lo + hist.w_m * j.ravel(),
        'prob': hist.prob.ravel(),
    })
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    write_manifest(path, config, {
        'command': 'build-hist',
        'kind': 'histogram',
        'w_n': hist.w_n, 'w_m': hist.w_m,
        'n_lo': hist.n_lo, 'm_lo': hist.m_lo,
        'n_bins': hist.n_bins, 'm_bins': hist.m_bins,
        'grid': ','.join(str(n) for n in hist.n_p_grid),
        'replicates': hist.replicates,
        'smoothing': hist.smoothing,
        'fingerprint': hist.params_fingerprint,
    })


def read_histogram(path):
    """
    Read a histogram written by write_histogram.

    Raises:
        DataFormatError: If the manifest is missing or the rows do not form valid distributions.
    """
    frame = _read_csv(path, HIST_COLUMNS, 'histogram')
    _, meta = read_manifest(path)
    try:
        w_n, w_m = float(meta['w_n']), float(meta['w_m'])
        n_lo, m_lo = float(meta['n_lo']), float(meta['m_lo'])
        n_bins, m_bins = int(meta['n_bins']), int(meta['m_bins'])
        grid = tuple(int(n) for n in meta['grid'].split(','))
    except (KeyError, ValueError) as e:
        raise DataFormatError(f"Histogram '{path}' needs a manifest with its bin geometry: {e}") from e

    if len(frame) != len(grid) * n_bins * m_bins:
        raise DataFormatError(f"Histogram '{path}' has {len(frame)} rows, expected {len(grid) * n_bins * m_bins}.")
    frame = frame.sort_values(['n_p', 'n_bin_lo', 'm_bin_lo'], kind='mergesort')
    prob = frame['prob'].to_numpy(dtype=float).reshape(len(grid), n_bins, m_bins)
    if np.any(prob < 0) or not np.allclose(prob.sum(axis=(1, 2)), 1.0, atol=1e-9):
        raise DataFormatError(f"Histogram '{path}' rows are not probability mass functions.")

    return ConditionalHistogram(
        n_p_grid=grid, w_n=w_n, w_m=w_m, n_lo=n_lo, m_lo=m_lo, prob=prob,
        replicates=int(meta.get('replicates', 0)), smoothing=float(meta.get('smoothing', 0.0)),
        params_fingerprint=meta.get('fingerprint', ''),
    )


def read_samples(path):
    """Samples CSV with a single ``value`` column, as a numpy array."""
    frame = _read_csv(path, ['value'], 'samples')
    values = pd.to_numeric(frame['value'], errors='coerce')
    if values.isna().any():
        raise DataFormatError(f"Samples '{path}' hold non-numeric values.")
    return values.to_numpy()


def read_np_path(path):
    """
    Daily N_P trajectory from an estimates CSV written by ``.estimate-np``.

    A day outside the histogram range takes the estimate of the last in-range
    day before it; leading out-of-range days take the first in-range estimate.

    Returns:
        list: One positive int per row, in day order.

    Raises:
        DataFormatError: On a bad header, a non-numeric estimate, or when no day is in range.
    """
    frame = _read_csv(path, ESTIMATE_COLUMNS, 'estimates').sort_values('day', kind='stable')
    in_range = frame['in_range'].astype(str).str.strip().str.lower() == 'true'
    values = pd.to_numeric(frame['n_p_ml'].where(in_range), errors='coerce')
    if (values.isna() & in_range).any():
        raise DataFormatError(f"Estimates '{path}' have in-range days without a numeric n_p_ml.")
    if values.isna().all():
        raise DataFormatError(f"Estimates '{path}' have no in-range day to take N_P from.")
    return [int(round(v)) for v in values.ffill().bfill()]
