import utils
import utils_io
import metrics
import inference
import pandas as pd
from halo import Halo
from errors import IBNetError, ParameterError

FITTERS = ['scaling', 'weibull', 'power_law', 'growth']


def _samples(shell, cfg, kind):
    """Fitter input: the --samples file, else durations or intervals of the series."""
    if cfg['samples']:
        return utils_io.read_samples(cfg['samples'])
    series = shell.workspace.series(cfg['series'])
    samples = metrics.duration_interval_samples(series, cfg['subject'])
    return samples.durations if kind == 'durations' else samples.intervals


def fit_scaling_rows(shell, cfg):
    series = shell.workspace.series(cfg['series'])
    counts = metrics.nm_series(series)
    fit = inference.fit_scaling(zip(counts['n'], counts['m']))
    return [('beta', fit.beta), ('intercept', fit.intercept), ('r2', fit.r2), ('n_points', fit.n_points)]


def fit_weibull_rows(shell, cfg):
    samples = _samples(shell, cfg, 'intervals')
    c_grid = utils.parse_float_grid(cfg['c_grid'])
    n_hat_grid = inference.default_n_hat_grid(len(samples), cfg['n_hat_min_rank'], cfg['n_hat_steps']) \
        if len(samples) > cfg['n_hat_min_rank'] else None
    fit = inference.fit_weibull_rank(samples, c_grid, n_hat_grid)
    return [
        ('c', fit.c), ('lambda', fit.lambda_), ('beta_coef', fit.beta_coef),
        ('cutoff', fit.cutoff), ('n_hat', fit.n_hat), ('r2', fit.r2), ('n_used', fit.n_used),
        ('ccdf_deviation', inference.weibull_ccdf_deviation(fit, samples)),
    ]


def fit_power_law_rows(shell, cfg):
    samples = _samples(shell, cfg, 'durations')
    fit = inference.fit_power_law(samples, min_tail=cfg['min_tail'])
    return [('exponent', fit.exponent), ('x_min', fit.x_min), ('ks', fit.ks), ('n_tail', fit.n_tail)]


def fit_growth_rows(shell, cfg):
    series = shell.workspace.series(cfg['series'])
    gamma = inference.fit_growth_exponent(metrics.aggregate_degree_curve(series))
    return [('gamma', gamma)]


RUNNERS = {
    'scaling': fit_scaling_rows,
    'weibull': fit_weibull_rows,
    'power_law': fit_power_law_rows,
    'growth': fit_growth_rows,
}


#command .fit
def do_fit(shell, arg):
    """
    Fit scaling, Weibull, power-law or K(t) growth models and report the parameters.

    Usage:
        .fit [--fitter scaling|weibull|power_law|growth|all] [--samples <values.csv>]
             [--subject pair|node|node_in|node_out] [--out <report.csv>]

    Weibull fits use intervals and power-law fits use durations of the series
    unless --samples (a CSV with a "value" column) is given. With "all", a
    fitter lacking data is reported and the others still run.
    """
    spinner = Halo(text='Fitting...', spinner='line')
    try:
        cfg, _ = shell.workspace.config(arg)
        selection = cfg['fitter'].replace('-', '_')
        if selection != 'all' and selection not in RUNNERS:
            raise ParameterError(f"Unknown fitter '{cfg['fitter']}'. Valid fitters: {', '.join(FITTERS)}, all.")
        names = FITTERS if selection == 'all' else [selection]
        out = utils.validate_output_path(cfg['out'], 'report') if cfg['out'] else ''
    except IBNetError as e:
        shell.report_error(e)
        return

    rows = []
    spinner.start()
    try:
        for name in names:
            spinner.text = f"Fitting {name}..."
            try:
                rows += [(name, parameter, value) for parameter, value in RUNNERS[name](shell, cfg)]
            except (IBNetError, OSError) as e:
                if len(names) == 1:
                    raise
                shell.report_error(e, name)
        spinner.succeed('Fitting completed!')
    except (IBNetError, OSError) as e:
        spinner.fail('Fitting failed!')
        shell.report_error(e, names[0])
        return
    finally:
        spinner.stop()

    report = pd.DataFrame(rows, columns=['fitter', 'parameter', 'value'])
    try:
        if out:
            utils_io.write_table(report, out)
            utils_io.write_manifest(out, cfg, {'command': 'fit', 'kind': 'fit_report', 'rows': len(report)})
            utils.write_output(f"Wrote fit report to {out}.")
        if not report.empty:
            shell.query_output(report)
    except OSError as e:
        shell.report_error(e)
