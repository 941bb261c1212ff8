import os
from errors import ParameterError

CONFIG_ENV = 'IBNET_CONFIG'
WORKERS_ENV = 'IBNET_WORKERS'

# key: (default, type, description)
DEFAULTS = {
    'seed': (0, int, 'master seed of every random stream'),
    # generative model
    'n_p': (300, int, 'potential market size N_P'),
    'alpha': (4.0, float, 'edge-kernel exponent'),
    'c1': (2000.0, float, 'reset probability scale, h(a) = a^c2 / c1'),
    'c2': (2.0, float, 'reset probability exponent'),
    'f_b': (0.56, float, 'fraction of pure borrowers'),
    'f_l': (0.34, float, 'fraction of pure lenders'),
    'f_d': (0.10, float, 'fraction of bidirectional traders'),
    'walk_half_width': (0.002, float, 'half-width of the angle increment support'),
    'horizon': (6500, int, 'simulated days T'),
    'burn_in': (5000, int, 'initial days discarded'),
    'weighted': (True, bool, 'run the edge-weight step'),
    'n_p_path': ('', str, 'estimates CSV whose n_p_ml column sets N_P per retained day'),
    # weight dynamics
    'q': (0.5, float, 'probability that a persisting edge redraws its weight'),
    'kappa': (80.0, float, 'weight scale'),
    'eta': (3.3, float, 'power-law exponent of the weight multiplier'),
    'nu_min': (1.0, float, 'lower bound of the weight multiplier'),
    # sweeps and histograms
    'workers': (1, int, 'worker processes for sweeps and histogram builds'),
    'grid': ('20:400:10', str, 'N_P grid (start:stop[:step] or comma list)'),
    'replicates': (500, int, 'simulations per N_P grid value'),
    'hist_days': (1, int, 'days kept per histogram replicate'),
    'hist_burn_in': (5000, int, 'activity-only burn-in days per histogram replicate'),
    'w_n': (5.0, float, 'histogram bin width along N'),
    'w_m': (20.0, float, 'histogram bin width along M'),
    'smoothing': (1.0, float, 'additive smoothing mass spread over all bins'),
    'sweep_grid': ('50:350:50', str, 'N_P grid of the scaling sweep'),
    'sweep_days': (100, int, 'days kept per sweep cell'),
    # fitting
    'c_grid': ('0.01:0.99:0.01', str, 'Weibull shape grid'),
    'n_hat_steps': (50, int, 'number of log-rank cutoffs tried'),
    'n_hat_min_rank': (20, int, 'smallest rank cutoff'),
    'min_tail': (50, int, 'minimum tail size when choosing x_min'),
    'subject': ('pair', str, 'duration/interval subject: pair, node, node_in, node_out'),
    # metrics
    'window': (250, int, 'days per activity-fraction window'),
    'smoothing_window': (20, int, 'moving-average window of the bipartivity series'),
    # ingestion
    'categories': ('ON,ONL', str, 'maturity categories kept'),
    'window_start': ('08:00', str, 'daily window start (inclusive)'),
    'window_end': ('18:00', str, 'daily window end (exclusive)'),
    'start_date': ('2000-01-03', str, 'first business day of a synthesized log'),
    # inputs and outputs
    'series': ('', str, 'series CSV path'),
    'hist': ('', str, 'histogram CSV path'),
    'samples': ('', str, 'samples CSV path (one value per row, column "value")'),
    'log': ('', str, 'transaction log CSV path'),
    'out': ('', str, 'output path (file or directory, per command)'),
    'metric': ('all', str, 'metric selection for analyze'),
    'fitter': ('all', str, 'fitter selection for fit'),
}


def coerce_value(key, raw):
    """Convert a raw string to the declared type of ``key``."""
    if key not in DEFAULTS:
        raise ParameterError(f"Unknown configuration key '{key}'.")
    _, kind, _ = DEFAULTS[key]
    if not isinstance(raw, str):
        return kind(raw)
    text = raw.strip()
    try:
        if kind is bool:
            lowered = text.lower()
            if lowered in ('true', '1', 'yes', 'on'):
                return True
            if lowered in ('false', '0', 'no', 'off'):
                return False
            raise ValueError(text)
        if kind is int:
            number = float(text)
            if not number.is_integer():
                raise ValueError(text)
            return int(number)
        return kind(text)
    except ValueError as e:
        raise ParameterError(f"Invalid value '{raw}' for '{key}' (expected {kind.__name__}).") from e


def load_config_file(path):
    """
    Read a ``key=value`` configuration file or manifest.

    Blank lines and ``#`` comments are skipped; ``meta.*`` keys are ignored.

    Args:
        path (str): File path.

    Returns:
        dict: Typed values for the keys present in the file.

    Raises:
        ParameterError: If the file cannot be read or has an unknown key or bad value.
    """
    values = {}
    try:
        with open(path, 'r', encoding='utf-8') as file:
            lines = file.readlines()
    except OSError as e:
        raise ParameterError(f"Cannot read config file '{path}': {e}") from e

    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        if '=' not in stripped:
            raise ParameterError(f"{path}:{number}: expected key=value, got '{stripped}'.")
        key, value = (part.strip() for part in stripped.split('=', 1))
        if key.startswith('meta.'):
            continue
        values[key] = coerce_value(key, value)
    return values


class RunConfig:
    def __init__(self, values):
        """
        Effective configuration of one command run.

        Args:
            values (dict): Complete mapping of every key in DEFAULTS.
        """
        self._values = dict(values)

    def __getitem__(self, key):
        return self._values[key]

    def get(self, key, default=None):
        return self._values.get(key, default)

    def items(self):
        return sorted(self._values.items())

    def replace(self, **changes):
        """Return a copy with some keys changed (values are coerced)."""
        values = dict(self._values)
        for key, value in changes.items():
            values[key] = coerce_value(key, value)
        return RunConfig(values)

    def model_params(self):
        """Build model.ModelParams from this configuration."""
        from model import ModelParams
        return ModelParams(
            n_p=self['n_p'], alpha=self['alpha'], c1=self['c1'], c2=self['c2'],
            fractions=(self['f_b'], self['f_l'], self['f_d']),
            walk_half_width=self['walk_half_width'],
            horizon=self['horizon'], burn_in=self['burn_in'],
        )

    def weight_params(self):
        """Build model.WeightParams from this configuration."""
        from model import WeightParams
        return WeightParams(q=self['q'], kappa=self['kappa'], eta=self['eta'], nu_min=self['nu_min'])


def default_values():
    """Defaults, with the worker count taken from IBNET_WORKERS when set."""
    values = {key: spec[0] for key, spec in DEFAULTS.items()}
    workers = os.environ.get(WORKERS_ENV)
    if workers:
        values['workers'] = coerce_value('workers', workers)
    return values


def resolve_config(flags=None, session_overrides=None):
    """
    Build the effective configuration of a command.

    Order: defaults, the IBNET_CONFIG file, session overrides set with ``.config``,
    the ``--config`` file, then the remaining flags.

    Args:
        flags (dict, optional): Flag values from utils.parse_flags.
        session_overrides (dict, optional): Typed values set in the workspace.

    Returns:
        RunConfig: The effective configuration.
    """
    flags = dict(flags or {})
    values = default_values()

    env_path = os.environ.get(CONFIG_ENV)
    if env_path:
        values.update(load_config_file(env_path))
    if session_overrides:
        values.update(session_overrides)

    config_path = flags.pop('config', None)
    if config_path:
        values.update(load_config_file(config_path))

    for key, raw in flags.items():
        values[key] = coerce_value(key, raw)
    return RunConfig(values)
