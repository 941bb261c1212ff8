"""
Transaction logs to daily networks.

A log is a CSV with header ``timestamp,lender,borrower,amount,category`` and
timestamps ``YYYY-MM-DD HH:MM``. Records are kept when their category is in an
allow-set and their time of day falls in a half-open window; each calendar day
becomes one directed network whose repeated pairs are summed and which is cut
down to its largest weakly connected component.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, time, timedelta

import networkx as nx
import numpy as np
import pandas as pd

from errors import ConsistencyError, DataFormatError, ParameterError, UndefinedMetricError
from model import DailyNetwork, Ingested, NetworkSeries

LOG_COLUMNS = ['timestamp', 'lender', 'borrower', 'amount', 'category']
TIMESTAMP_FORMAT = '%Y-%m-%d %H:%M'
DEFAULT_CATEGORIES = ('ON', 'ONL')
DEFAULT_WINDOW = (time(8, 0), time(18, 0))
OVERLONG_ROW = '\x00overlong'


@dataclass(frozen=True)
class TransactionRecord:
    timestamp: datetime
    lender: str
    borrower: str
    amount: float
    category: str


@dataclass(frozen=True)
class Reject:
    line: int
    reason: str


def parse_transactions(stream):
    """
    Parse a transaction log.

    Rows that cannot become a record are reported, never dropped silently.
    Line numbers count the header as line 1; a row whose field count differs
    from the header's is rejected as 'wrong field count'.

    Args:
        stream: Text stream or path accepted by pandas.read_csv.

    Returns:
        tuple: (list of TransactionRecord in input order, list of Reject).

    Raises:
        DataFormatError: If the header is missing, the bytes are not UTF-8 or
            the CSV cannot be split into rows.
    """
    try:
        # the header is read as row 0 so an overlong first row cannot become an index;
        # overlong rows come back as a one-field stub so every row keeps its line number
        raw = pd.read_csv(stream, header=None, dtype=str, keep_default_na=False, skip_blank_lines=False,
                          engine='python', on_bad_lines=lambda fields: [OVERLONG_ROW])
    except pd.errors.EmptyDataError as e:
        raise DataFormatError("Transaction log is empty; expected a header row.") from e
    except pd.errors.ParserError as e:
        raise DataFormatError(f"Transaction log is not valid CSV: {e}") from e
    except UnicodeDecodeError as e:
        raise DataFormatError(f"Transaction log is not UTF-8 text: {e}") from e

    columns = [str(c).strip() for c in raw.iloc[0].fillna('')]
    missing = [c for c in LOG_COLUMNS if c not in columns]
    if missing:
        raise DataFormatError(f"Transaction log header is missing {', '.join(missing)}.")
    raw = raw.iloc[1:].set_axis(columns, axis=1)
    blank = (raw.fillna('').apply(lambda col: col.str.strip()) == '').all(axis=1)
    short = raw.isna().any(axis=1) & ~blank
    frame = raw[LOG_COLUMNS].fillna('').apply(lambda col: col.str.strip())

    stamps = pd.to_datetime(frame['timestamp'], format=TIMESTAMP_FORMAT, errors='coerce')
    amounts = pd.to_numeric(frame['amount'], errors='coerce')

    reasons = pd.Series('', index=frame.index)
    checks = [
        (blank, 'empty row'),
        (short, 'wrong field count'),
        (stamps.isna(), 'bad timestamp'),
        (amounts.isna(), 'bad amount'),
        (amounts <= 0, 'nonpositive amount'),
        ((frame['lender'] == '') | (frame['borrower'] == ''), 'missing bank id'),
        (frame['lender'] == frame['borrower'], 'self-loop'),
    ]
    # the first failing check names the reject
    for failed, reason in reversed(checks):
        reasons[failed.fillna(False).astype(bool)] = reason

    bad = reasons != ''
    rejects = [Reject(line=int(i) + 1, reason=reasons[i]) for i in frame.index[bad]]
    good = ~bad
    records = [
        TransactionRecord(timestamp=ts.to_pydatetime(), lender=lender, borrower=borrower,
                          amount=float(amount), category=category)
        for ts, lender, borrower, amount, category in zip(
            stamps[good], frame.loc[good, 'lender'], frame.loc[good, 'borrower'],
            amounts[good], frame.loc[good, 'category'])
    ]
    return records, rejects


def filter_overnight(records, categories=DEFAULT_CATEGORIES):
    """Keep records whose category is in ``categories``."""
    allowed = set(categories)
    return [record for record in records if record.category in allowed]


def largest_weakly_connected_component(net):
    """
    Restrict a daily network to its largest weakly connected component.

    Ties on size go to the larger total weight, then to the component holding
    the smallest bank id.

    Raises:
        UndefinedMetricError: For a network without edges.
    """
    if not net.edges:
        raise UndefinedMetricError(f"Largest component is undefined for the empty network of day {net.day}.")
    graph = nx.DiGraph()
    graph.add_weighted_edges_from((lender, borrower, weight) for (lender, borrower), weight in net.edges.items())

    def rank(component):
        total = sum(w for _, _, w in graph.subgraph(component).edges(data='weight'))
        return -len(component), -total, min(component)

    keep = min(nx.weakly_connected_components(graph), key=rank)
    edges = {pair: weight for pair, weight in net.edges.items() if pair[0] in keep}
    return DailyNetwork(day=net.day, edges=edges, weighted=net.weighted)


def build_daily_networks(records, window=DEFAULT_WINDOW, source=''):
    """
    Turn records into a series of daily networks.

    Records outside [window start, window end) are dropped. Bank labels map to
    ids 1.. in sorted label order. Days without in-window records are skipped,
    so day d is the d-th retained calendar date.

    Args:
        records (list): TransactionRecord values.
        window (tuple): (start, end) as datetime.time.
        source (str, optional): Provenance label.

    Returns:
        NetworkSeries: Weighted series with Ingested provenance.
    """
    start, end = window
    labels = sorted({r.lender for r in records} | {r.borrower for r in records})
    ids = {label: k for k, label in enumerate(labels, start=1)}

    kept = [r for r in records if start <= r.timestamp.time() < end]
    frame = pd.DataFrame({
        'date': [r.timestamp.date() for r in kept],
        'lender': [ids[r.lender] for r in kept],
        'borrower': [ids[r.borrower] for r in kept],
        'amount': [r.amount for r in kept],
    })

    networks, dates = [], []
    if not frame.empty:
        volume = frame.groupby(['date', 'lender', 'borrower'], sort=True)['amount'].sum()
        for day, (date, edges) in enumerate(volume.groupby(level='date', sort=True)):
            daily = DailyNetwork(
                day=day,
                edges={(int(lender), int(borrower)): float(w) for (_, lender, borrower), w in edges.items()},
                weighted=True,
            )
            net = largest_weakly_connected_component(daily)
            if not nx.is_weakly_connected(nx.DiGraph(list(net.edges))):
                raise ConsistencyError(f"Network of {date} is not weakly connected after component extraction.")
            networks.append(net)
            dates.append(date.isoformat())

    return NetworkSeries(
        networks=networks,
        provenance=Ingested(source=source, bank_labels=tuple(labels), dates=tuple(dates)),
        bank_ids=tuple(range(1, len(labels) + 1)),
    )


def synthesize_transactions(series, start_date='2000-01-03', seed=0, onl_share=0.2, window=DEFAULT_WINDOW):
    """
    Write a series out as a minute-stamped transaction log.

    Day positions map to consecutive business days from ``start_date``. Each
    edge becomes one to three tickets whose amounts sum to its weight, stamped
    at uniform minutes inside the window. A ticket is ONL with probability
    ``onl_share``, otherwise ON. Banks are labelled ``B0001``, ``B0002``, ...
    unless the series carries labels of its own.

    Returns:
        list: TransactionRecord values sorted by timestamp, lender, borrower.
    """
    rng = np.random.default_rng(seed)
    dates = pd.bdate_range(start=start_date, periods=max(series.n_days, 1))
    labels = getattr(series.provenance, 'bank_labels', ())
    start_minute = window[0].hour * 60 + window[0].minute
    span = window[1].hour * 60 + window[1].minute - start_minute

    def label(bank):
        return labels[bank - 1] if labels else f"B{bank:04d}"

    records = []
    for position, net in enumerate(series.networks):
        midnight = dates[position].to_pydatetime()
        for (lender, borrower), weight in sorted(net.edges.items()):
            tickets = int(rng.integers(1, 4))
            amounts = weight * rng.dirichlet(np.ones(tickets))
            minutes = rng.integers(0, span, size=tickets)
            large = rng.random(tickets) < onl_share
            for amount, minute, is_large in zip(amounts, minutes, large):
                records.append(TransactionRecord(
                    timestamp=midnight + timedelta(minutes=int(start_minute + minute)),
                    lender=label(lender), borrower=label(borrower),
                    amount=float(amount), category='ONL' if is_large else 'ON',
                ))
    records.sort(key=lambda r: (r.timestamp, r.lender, r.borrower))
    return records


def transactions_frame(records):
    """Records as a DataFrame in log column order, timestamps formatted."""
    return pd.DataFrame({
        'timestamp': [r.timestamp.strftime(TIMESTAMP_FORMAT) for r in records],
        'lender': [r.lender for r in records],
        'borrower': [r.borrower for r in records],
        'amount': [r.amount for r in records],
        'category': [r.category for r in records],
    }, columns=LOG_COLUMNS)


def write_transactions(records, path):
    """Write records as a transaction log CSV."""
    transactions_frame(records).to_csv(path, index=False, float_format='%.12g', lineterminator='\n')


def parse_window(start, end):
    """Parse ``HH:MM`` bounds into a (start, end) window."""
    try:
        window = (datetime.strptime(start, '%H:%M').time(), datetime.strptime(end, '%H:%M').time())
    except ValueError as e:
        raise ParameterError(f"Invalid time window {start}-{end}: {e}") from e
    if window[0] >= window[1]:
        raise ParameterError(f"Time window start {start} must precede end {end}.")
    return window
