import numpy as np
import pytest

import utils_io
from config import resolve_config
from conftest import make_series
from errors import DataFormatError
from inference import ConditionalHistogram
from model import DailyNetwork, Ingested, NetworkSeries, Simulated, simulate_series


@pytest.fixture
def cfg(monkeypatch):
    monkeypatch.delenv('IBNET_CONFIG', raising=False)
    return resolve_config({'n_p': '60', 'horizon': '160', 'burn_in': '40', 'seed': '3'})


class TestSeriesFiles:
    def test_simulated_round_trip(self, tmp_path, cfg):
        series = simulate_series(cfg.model_params(), cfg.weight_params(), seed=cfg['seed'])
        path = str(tmp_path / 'sim.csv')
        utils_io.write_series(series, path, cfg, 'simulate')
        loaded = utils_io.read_series(path)
        assert loaded.days == series.days
        assert isinstance(loaded.provenance, Simulated)
        assert loaded.provenance.params == cfg.model_params()
        assert loaded.bank_types == series.bank_types
        for original, copy in zip(series.networks, loaded.networks):
            assert copy.edges.keys() == original.edges.keys()
            assert np.allclose(list(copy.edges.values()), list(original.edges.values()), rtol=1e-11)

    def test_empty_days_survive(self, tmp_path, cfg):
        series = make_series([{}, {(1, 2): 2.0}, {}, {}])
        path = str(tmp_path / 'gappy.csv')
        utils_io.write_series(series, path, cfg, 'ingest')
        loaded = utils_io.read_series(path)
        assert loaded.days == [0, 1, 2, 3]
        assert [net.n_edges for net in loaded.networks] == [0, 1, 0, 0]
        assert isinstance(loaded.provenance, Ingested)

    def test_labels_and_dates(self, tmp_path, cfg):
        networks = [DailyNetwork(day=0, edges={(1, 2): 3.0})]
        series = NetworkSeries(networks=networks, bank_ids=(1, 2),
                               provenance=Ingested('log.csv', bank_labels=('X', 'Y'), dates=('2001-02-05',)))
        path = str(tmp_path / 'labelled.csv')
        utils_io.write_series(series, path, cfg, 'ingest')
        _, meta = utils_io.read_manifest(path)
        assert meta['first_date'] == '2001-02-05'
        assert meta['kind'] == 'ingested'
        assert utils_io.read_series(path).provenance.bank_labels == ('X', 'Y')

    def test_identical_runs_write_identical_bytes(self, tmp_path, cfg):
        paths = []
        for name in ('a', 'b'):
            (tmp_path / name).mkdir()
            series = simulate_series(cfg.model_params(), cfg.weight_params(), seed=cfg['seed'])
            path = tmp_path / name / 'series.csv'
            utils_io.write_series(series, str(path), cfg, 'simulate')
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert (tmp_path / 'a' / 'series.csv.manifest').read_bytes() == \
            (tmp_path / 'b' / 'series.csv.manifest').read_bytes()

    def test_plain_csv_without_manifest(self, tmp_path):
        path = tmp_path / 'plain.csv'
        path.write_text('day,lender,borrower,weight\n0,1,2,1.5\n2,2,3,4\n')
        series = utils_io.read_series(str(path))
        assert series.days == [0, 2]
        assert series.bank_ids == (1, 2, 3)

    @pytest.mark.parametrize('content', [
        'day,from,to,weight\n0,1,2,1\n',
        'day,lender,borrower,weight\n0,1,1,1\n',
        'day,lender,borrower,weight\n0,1,2,-3\n',
        'day,lender,borrower,weight\n0,1,2,x\n',
        'day,lender,borrower,weight\n0,1,2,1\n0,1,2,2\n',
    ])
    def test_malformed_series(self, tmp_path, content):
        path = tmp_path / 'bad.csv'
        path.write_text(content)
        with pytest.raises(DataFormatError):
            utils_io.read_series(str(path))


def small_histogram():
    prob = np.array([[[0.25, 0.25], [0.5, 0.0]], [[0.1, 0.2], [0.3, 0.4]]])
    return ConditionalHistogram(n_p_grid=(10, 20), w_n=5.0, w_m=20.0, n_lo=0.0, m_lo=20.0, prob=prob,
                                replicates=4, smoothing=0.0, params_fingerprint='alpha=4.0')


class TestHistogramFiles:
    def test_round_trip(self, tmp_path, cfg):
        path = str(tmp_path / 'hist.csv')
        utils_io.write_histogram(small_histogram(), path, cfg)
        loaded = utils_io.read_histogram(path)
        assert loaded.n_p_grid == (10, 20)
        assert (loaded.w_n, loaded.w_m, loaded.n_lo, loaded.m_lo) == (5.0, 20.0, 0.0, 20.0)
        assert np.array_equal(loaded.prob, small_histogram().prob)
        assert loaded.params_fingerprint == 'alpha=4.0'

    def test_rows_must_sum_to_one(self, tmp_path, cfg):
        path = tmp_path / 'hist.csv'
        utils_io.write_histogram(small_histogram(), str(path), cfg)
        lines = path.read_text().splitlines()
        lines[1] = lines[1].rsplit(',', 1)[0] + ',0.9'
        path.write_text('\n'.join(lines) + '\n')
        with pytest.raises(DataFormatError):
            utils_io.read_histogram(str(path))

    def test_needs_manifest(self, tmp_path):
        path = tmp_path / 'hist.csv'
        path.write_text('n_p,n_bin_lo,m_bin_lo,prob\n10,0,0,1\n')
        with pytest.raises(DataFormatError):
            utils_io.read_histogram(str(path))


class TestSamples:
    def test_values(self, tmp_path):
        path = tmp_path / 'samples.csv'
        path.write_text('value\n3\n1\n4\n')
        assert list(utils_io.read_samples(str(path))) == [3, 1, 4]

    def test_bad_header(self, tmp_path):
        path = tmp_path / 'samples.csv'
        path.write_text('x\n3\n')
        with pytest.raises(DataFormatError):
            utils_io.read_samples(str(path))


class TestNpPath:
    HEADER = 'day,n,m,n_p_ml,log_likelihood,flat,in_range\n'

    def write(self, tmp_path, rows):
        path = tmp_path / 'estimates.csv'
        path.write_text(self.HEADER + ''.join(f'{row}\n' for row in rows))
        return str(path)

    def test_out_of_range_days_carry_the_last_estimate(self, tmp_path):
        path = self.write(tmp_path, ['0,1,1,,,,False', '1,5,6,120,-3.1,False,True', '2,90,400,,,,False',
                                     '3,30,40,80,-2.2,True,True'])
        assert utils_io.read_np_path(path) == [120, 120, 120, 80]

    def test_rows_follow_day_order(self, tmp_path):
        path = self.write(tmp_path, ['1,5,6,60,-3.1,False,True', '0,5,6,100,-3.1,False,True'])
        assert utils_io.read_np_path(path) == [100, 60]

    def test_no_day_in_range(self, tmp_path):
        path = self.write(tmp_path, ['0,1,1,,,,False'])
        with pytest.raises(DataFormatError):
            utils_io.read_np_path(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / 'estimates.csv'
        path.write_text('day,n_p\n0,100\n')
        with pytest.raises(DataFormatError):
            utils_io.read_np_path(str(path))
