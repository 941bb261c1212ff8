import utils
import utils_io
import pandas as pd
from inference import OutOfRange, estimate_np_series
from errors import IBNetError


#command .estimate-np
def do_estimate_np(shell, arg):
    """
    Daily maximum-likelihood N_P of a series from a conditional histogram.

    Usage:
        .estimate-np [--hist <hist.csv>] [--series <series.csv>] [--out <estimates.csv>]

    Columns: day, n, m, n_p_ml, log_likelihood, flat, in_range. Days whose
    (N, M) fall outside the histogram keep their row with in_range false.
    """
    try:
        cfg, _ = shell.workspace.config(arg)
        hist = shell.workspace.histogram(cfg['hist'])
        series = shell.workspace.series(cfg['series'])

        rows = []
        for (day, estimate), net in zip(estimate_np_series(hist, series), series.networks):
            n, m = len(net.active_banks()), net.n_edges
            if isinstance(estimate, OutOfRange):
                rows.append((day, n, m, None, None, None, False))
            else:
                rows.append((day, n, m, estimate.n_p_ml, estimate.log_likelihood, estimate.flat_flag, True))
        table = pd.DataFrame(rows, columns=utils_io.ESTIMATE_COLUMNS)

        outside = int((~table['in_range']).sum())
        if cfg['out']:
            out = utils.validate_output_path(cfg['out'], 'estimates')
            utils_io.write_table(table, out)
            utils_io.write_manifest(out, cfg, {'command': 'estimate-np', 'kind': 'estimates',
                                               'rows': len(table), 'out_of_range': outside})
            utils.write_output(f"Wrote {len(table)} daily estimates to {out}.")
        else:
            shell.query_output(table)
        if outside:
            utils.write_output(f"{outside} day(s) fall outside the histogram range.")
    except (IBNetError, OSError) as e:
        shell.report_error(e)
