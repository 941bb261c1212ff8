import os
import sys
import importlib.util

import numpy as np
import pytest
from scipy import special

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from model import DailyNetwork, Ingested, ModelParams, NetworkSeries, WeightParams  # noqa: E402

SAMPLE_LOG = os.path.join(ROOT, 'samples', 'sample_log.csv')


def make_series(day_edges, weighted=True):
    """Ingested-style series from a list of {(lender, borrower): weight} dicts, days 0, 1, ..."""
    networks = [DailyNetwork(day=day, edges=dict(edges), weighted=weighted) for day, edges in enumerate(day_edges)]
    banks = sorted({b for edges in day_edges for pair in edges for b in pair})
    return NetworkSeries(networks=networks, provenance=Ingested(source='test'), bank_ids=tuple(banks))


def discrete_power_law(exponent, size, rng, k_max=1_000_000):
    """Exact inverse-CDF draws from p(k) = k^-exponent / zeta(exponent), k >= 1 (truncated at k_max)."""
    k = np.arange(1, k_max + 1, dtype=float)
    cdf = np.cumsum(k ** -exponent) / special.zeta(exponent, 1)
    draws = np.searchsorted(cdf, rng.random(size), side='left') + 1
    return np.minimum(draws, k_max)


def load_shell_module():
    spec = importlib.util.spec_from_file_location('ibnet_shell', os.path.join(ROOT, 'ibnet-shell.py'))
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_params():
    return ModelParams(n_p=60, horizon=160, burn_in=40)


@pytest.fixture
def weight_params():
    return WeightParams()


@pytest.fixture
def sample_log():
    return SAMPLE_LOG


@pytest.fixture
def shell(monkeypatch):
    """A fresh shell with an isolated configuration environment."""
    monkeypatch.delenv('IBNET_CONFIG', raising=False)
    monkeypatch.delenv('IBNET_WORKERS', raising=False)
    module = load_shell_module()
    import workspace
    return module.IBNetShell(workspace.Workspace())
