import math

import networkx as nx
import numpy as np
import pytest

from conftest import make_series
from errors import ParameterError, UndefinedMetricError
from metrics import (Subject, activity_fractions, aggregate_degree_curve, bank_type_fractions, bipartivity,
                     bipartivity_series, ccdf_table, degree_distributions, duration_interval_samples, nm_series,
                     strength_vs_degree, summary_statistics, turnover_rate, weight_growth_rates,
                     weight_strength_distributions)
from model import DailyNetwork, Ingested, NetworkSeries


def net(edges, day=0):
    return DailyNetwork(day=day, edges=dict.fromkeys(edges, 1.0))


class TestCcdf:
    def test_survival_values(self):
        table = ccdf_table([1, 1, 2, 5])
        assert list(table.values) == [1.0, 2.0, 5.0]
        assert list(table.ccdf) == [1.0, 0.5, 0.25]
        assert table.survival(3) == 0.25
        assert table.survival(6) == 0.0

    def test_empty(self):
        assert len(ccdf_table([])) == 0


class TestBipartivity:
    def test_single_edge(self):
        assert bipartivity(net([(1, 2)])) == pytest.approx(1.0, abs=1e-12)

    def test_triangle(self):
        expected = (math.cosh(2) + 2 * math.cosh(1)) / (math.exp(2) + 2 * math.exp(-1))
        value = bipartivity(net([(1, 2), (2, 3), (3, 1)]))
        assert value == pytest.approx(expected, abs=1e-12)
        assert value == pytest.approx(0.8429, abs=1e-4)

    def test_star(self):
        assert bipartivity(net([(1, 2), (1, 3), (1, 4), (1, 5)])) == pytest.approx(1.0, abs=1e-12)

    def test_reciprocal_edges_merge(self):
        assert bipartivity(net([(1, 2), (2, 1)])) == pytest.approx(1.0, abs=1e-12)

    def test_odd_cycle_below_one(self):
        value = bipartivity(net([(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]))
        assert 0.5 < value < 1.0

    def test_empty_network(self):
        with pytest.raises(UndefinedMetricError):
            bipartivity(DailyNetwork(day=3))

    def test_series_marks_empty_days(self):
        series = make_series([{(1, 2): 1.0}, {}, {(1, 2): 1.0, (2, 3): 1.0, (3, 1): 1.0}])
        frame = bipartivity_series(series, smoothing_window=2)
        assert np.isnan(frame['bipartivity'][1])
        assert frame['moving_average'][1] == pytest.approx(1.0)
        assert frame['moving_average'][2] == pytest.approx(frame['bipartivity'][2])


class TestTurnover:
    def test_identical_days(self):
        series = make_series([{(1, 2): 1.0}, {(2, 1): 3.0}])
        assert turnover_rate(series) == 0.0

    def test_disjoint_days(self):
        series = make_series([{(1, 2): 1.0}, {(3, 4): 1.0}])
        assert turnover_rate(series) == 1.0

    def test_partial_overlap(self):
        series = make_series([{(1, 2): 1.0}, {(2, 3): 1.0}])
        assert turnover_rate(series) == pytest.approx(2.0 / 3.0)

    def test_empty_neighbour_counts_as_full_change(self):
        series = make_series([{(1, 2): 1.0}, {}, {}, {(1, 2): 1.0}])
        assert turnover_rate(series) == pytest.approx(1.0)

    def test_single_day(self):
        with pytest.raises(UndefinedMetricError):
            turnover_rate(make_series([{(1, 2): 1.0}]))

    def test_all_empty(self):
        with pytest.raises(UndefinedMetricError):
            turnover_rate(make_series([{}, {}]))


class TestDurations:
    def series(self):
        days = [{} for _ in range(7)]
        for day in (1, 2, 3, 5):
            days[day] = {(1, 2): 1.0}
        return make_series(days)

    def test_pair_runs(self):
        samples = duration_interval_samples(self.series(), 'pair')
        assert sorted(samples.durations) == [1, 3]
        assert list(samples.intervals) == [1]
        assert len(samples.censored) == 0

    def test_censored_runs_are_separated(self):
        days = [{(1, 2): 1.0}, {(1, 2): 1.0}, {}, {(1, 2): 1.0}, {}, {(1, 2): 1.0}]
        samples = duration_interval_samples(make_series(days))
        assert list(samples.durations) == [1]
        assert sorted(samples.censored) == [1, 2]
        assert list(samples.intervals) == [1, 1]

    def test_active_days_are_conserved(self):
        days = [{(1, 2): 1.0, (2, 3): 1.0}, {(1, 2): 1.0}, {(3, 1): 1.0}, {(2, 3): 1.0, (1, 2): 1.0}, {}]
        series = make_series(days)
        for subject in Subject:
            samples = duration_interval_samples(series, subject)
            total = samples.durations.sum() + samples.censored.sum()
            frame = series.to_frame()
            if subject is Subject.PAIR:
                expected = len(frame)
            elif subject is Subject.NODE_OUT:
                expected = len(frame[['day', 'lender']].drop_duplicates())
            elif subject is Subject.NODE_IN:
                expected = len(frame[['day', 'borrower']].drop_duplicates())
            else:
                expected = sum(len(n.active_banks()) for n in series.networks)
            assert total == expected

    def test_node_subject(self):
        days = [{}, {(1, 2): 1.0}, {(2, 3): 1.0}, {}, {(3, 2): 1.0}, {}]
        samples = duration_interval_samples(make_series(days), Subject.NODE_ACTIVE)
        # bank 1: day 1; bank 2: days 1, 2, 4; bank 3: days 2, 4
        assert sorted(samples.durations) == [1, 1, 1, 1, 2]
        assert sorted(samples.intervals) == [1, 1]

    def test_positions_ignore_calendar_gaps(self):
        networks = [DailyNetwork(day=d, edges={(1, 2): 1.0}) for d in (0, 1, 5)]
        series = NetworkSeries(networks=networks, provenance=Ingested(source='gaps'), bank_ids=(1, 2))
        samples = duration_interval_samples(series)
        assert list(samples.censored) == [3]
        assert len(samples.intervals) == 0

    def test_unknown_subject(self):
        with pytest.raises(ParameterError):
            duration_interval_samples(self.series(), 'bank')


class TestAggregateDegree:
    def test_curve(self):
        series = make_series([{(1, 2): 1.0}, {(2, 3): 1.0}, {(1, 2): 1.0}])
        curve = aggregate_degree_curve(series)
        assert list(curve['k_norm']) == pytest.approx([0.5, 1.0, 1.0])
        assert list(curve['t']) == [0, 1, 2]

    def test_nondecreasing_ends_at_one(self):
        days = [{(1, 2): 1.0}, {}, {(3, 4): 1.0, (1, 3): 1.0}, {(4, 1): 1.0}]
        k = aggregate_degree_curve(make_series(days))['k_norm'].to_numpy()
        assert np.all(np.diff(k) >= 0)
        assert k[-1] == 1.0

    def test_no_edges(self):
        with pytest.raises(UndefinedMetricError):
            aggregate_degree_curve(make_series([{}, {}]))


class TestDegreesAndStrengths:
    def test_star_degrees(self):
        series = make_series([{(1, 2): 1.0, (1, 3): 1.0, (1, 4): 1.0}])
        in_table, out_table = degree_distributions(series)
        assert in_table.survival(1) == pytest.approx(0.75)
        assert out_table.survival(3) == pytest.approx(0.25)
        assert out_table.survival(1) == pytest.approx(0.25)

    def test_strength_vs_degree(self):
        series = make_series([{(1, 2): 2.0, (1, 3): 4.0}, {(1, 2): 6.0}])
        table = strength_vs_degree(series)
        out_part = table[table['direction'] == 'out'].set_index('degree')['mean_strength']
        in_part = table[table['direction'] == 'in'].set_index('degree')['mean_strength']
        assert out_part[2] == pytest.approx(6.0)
        assert out_part[1] == pytest.approx(6.0)
        assert in_part[1] == pytest.approx(4.0)

    def test_weight_distributions(self):
        series = make_series([{(1, 2): 2.0, (1, 3): 4.0}, {(1, 2): 6.0}])
        tables = weight_strength_distributions(series)
        assert list(tables['weight'].values) == [2.0, 4.0, 6.0]
        assert list(tables['out_strength'].values) == [6.0]
        assert tables['in_strength'].survival(4.0) == pytest.approx(2.0 / 3.0)

    def test_unweighted_series(self):
        series = make_series([{(1, 2): 1.0}], weighted=False)
        with pytest.raises(UndefinedMetricError):
            strength_vs_degree(series)
        with pytest.raises(UndefinedMetricError):
            weight_growth_rates(series)

    def test_growth_rates(self):
        series = make_series([{(1, 2): 2.0, (2, 3): 5.0}, {(1, 2): 4.0}, {(2, 3): 5.0}])
        rates = weight_growth_rates(series)
        assert list(rates) == pytest.approx([math.log(2.0)])


class TestActivity:
    def test_window_fractions(self):
        days = [{(1, 2): 1.0}, {}, {(1, 3): 1.0}, {(1, 3): 1.0}, {(2, 3): 1.0}]
        frame = activity_fractions(make_series(days), window=2)
        assert len(frame) == 2 * 3
        first = frame[frame['window'] == 0].set_index('bank')
        second = frame[frame['window'] == 1].set_index('bank')
        assert first.loc[1, 'f_active'] == 0.5
        assert second.loc[1, 'f_active'] == 1.0
        assert second.loc[1, 'delta_f'] == 0.5
        assert first['delta_f'].isna().all()

    def test_short_series(self):
        assert activity_fractions(make_series([{(1, 2): 1.0}]), window=5).empty

    def test_bad_window(self):
        with pytest.raises(ParameterError):
            activity_fractions(make_series([{(1, 2): 1.0}]), window=0)


class TestSummary:
    def test_roles(self):
        series = make_series([{(1, 2): 1.0, (2, 3): 1.0}])
        assert bank_type_fractions(series) == pytest.approx(
            {'lender': 1 / 3, 'borrower': 1 / 3, 'bidirectional': 1 / 3})

    def test_nm_series(self):
        frame = nm_series(make_series([{(1, 2): 1.0, (2, 3): 1.0}, {}]))
        assert frame.values.tolist() == [[0, 3, 2], [1, 0, 0]]

    def test_summary_keys(self):
        series = make_series([{(1, 2): 1.0}, {(2, 3): 1.0}])
        stats = summary_statistics(series)
        assert stats['days'] == 2
        assert stats['mean_n'] == 2.0
        assert stats['turnover'] == pytest.approx(2.0 / 3.0)
        assert stats['mean_bipartivity'] == pytest.approx(1.0)
        assert set(stats) >= {'frac_lender', 'frac_borrower', 'frac_bidirectional'}


@pytest.mark.parametrize('seed', range(8))
def test_bipartivity_is_one_exactly_for_two_colorable_graphs(seed):
    rng = np.random.default_rng(seed)
    pairs = {(int(a), int(b)) for a, b in rng.integers(1, 9, size=(10, 2)) if a != b}
    value = bipartivity(net(sorted(pairs)))
    assert (abs(value - 1.0) < 1e-9) == nx.is_bipartite(nx.Graph(list(pairs)))
