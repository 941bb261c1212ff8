import os
import pandas as pd
import utils
import utils_io
import metrics
from halo import Halo
from errors import IBNetError, ParameterError, UndefinedMetricError


def _durations_table(series, cfg):
    samples = metrics.duration_interval_samples(series, cfg['subject'])
    return pd.concat([
        pd.DataFrame({'kind': 'duration', 'value': samples.durations}),
        pd.DataFrame({'kind': 'interval', 'value': samples.intervals}),
        pd.DataFrame({'kind': 'censored', 'value': samples.censored}),
    ], ignore_index=True)


def _degrees_table(series, cfg):
    in_table, out_table = metrics.degree_distributions(series)
    return pd.concat([
        in_table.to_frame().assign(direction='in'),
        out_table.to_frame().assign(direction='out'),
    ], ignore_index=True)


def _weights_table(series, cfg):
    tables = metrics.weight_strength_distributions(series)
    return pd.concat([table.to_frame().assign(quantity=name) for name, table in tables.items()],
                     ignore_index=True)


def _turnover_table(series, cfg):
    return pd.DataFrame({'turnover': [metrics.turnover_rate(series)]})


def _summary_table(series, cfg):
    return pd.DataFrame(list(metrics.summary_statistics(series).items()), columns=['statistic', 'value'])


def _roles_table(series, cfg):
    return pd.DataFrame(list(metrics.bank_type_fractions(series).items()), columns=['role', 'fraction'])


METRICS = {
    'nm': lambda series, cfg: metrics.nm_series(series),
    'bipartivity': lambda series, cfg: metrics.bipartivity_series(series, cfg['smoothing_window']),
    'turnover': _turnover_table,
    'durations': _durations_table,
    'kt': lambda series, cfg: metrics.aggregate_degree_curve(series),
    'degrees': _degrees_table,
    'strengths': lambda series, cfg: metrics.strength_vs_degree(series),
    'weights': _weights_table,
    'growth': lambda series, cfg: pd.DataFrame({'r': metrics.weight_growth_rates(series)}),
    'activity': lambda series, cfg: metrics.activity_fractions(series, cfg['window']),
    'roles': _roles_table,
    'summary': _summary_table,
}


def select_metrics(selection):
    """Metric names from a comma list; ``all`` selects every metric."""
    names = [name.strip() for name in selection.split(',') if name.strip()]
    if names == ['all']:
        return list(METRICS)
    unknown = [name for name in names if name not in METRICS]
    if unknown or not names:
        raise ParameterError(f"Unknown metric '{','.join(unknown)}'. Valid metrics: {', '.join(METRICS)}, all.")
    return names


#command .analyze
def do_analyze(shell, arg):
    """
    Compute metric tables of the current (or --series) series.

    Usage:
        .analyze [--metric bipartivity|turnover|durations|kt|degrees|strengths|weights|growth|activity|nm|roles|summary|all]
                 [--out <directory>] [--subject pair|node|node_in|node_out] [--window 250]

    Several metrics may be given as a comma list. With --out every table is
    written to <directory>/<metric>.csv with a manifest; otherwise tables are
    printed in the current .mode.
    """
    spinner = Halo(text='Analyzing series...', spinner='line')
    try:
        cfg, _ = shell.workspace.config(arg)
        names = select_metrics(cfg['metric'])
        series = shell.workspace.series(cfg['series'])
        out = cfg['out']
        if out:
            utils.validate_output_path(out, 'output directory')
            os.makedirs(out, exist_ok=True)

        spinner.start()
        tables = {}
        skipped = []
        for name in names:
            spinner.text = f"Computing {name}..."
            try:
                tables[name] = METRICS[name](series, cfg)
            except UndefinedMetricError as e:
                # "all" keeps going past metrics the series cannot support
                if cfg['metric'] != 'all':
                    raise
                skipped.append((name, str(e)))
        spinner.succeed('Analysis completed!')
        for name, reason in skipped:
            utils.write_output(f"Skipped {name}: {reason}")

        for name, table in tables.items():
            if out:
                path = os.path.join(out, f"{name}.csv")
                utils_io.write_table(table, path)
                utils_io.write_manifest(path, cfg, {'command': 'analyze', 'kind': name, 'rows': len(table)})
                utils.write_output(f"Wrote {name} ({len(table)} rows) to {path}.")
            else:
                utils.write_output(f"== {name}")
                shell.query_output(table)
    except (IBNetError, OSError) as e:
        spinner.fail('Analysis failed!')
        shell.report_error(e)
    finally:
        spinner.stop()
