import utils
import utils_io
import pandas as pd
from theory import curve_slope, theoretical_scaling_curve
from errors import IBNetError


#command .theory
def do_theory(shell, arg):
    """
    Closed-form expected (N, M) of the untyped model over an N_P grid.

    Usage:
        .theory [--alpha 4] [--grid 20:300] [--out <theory.csv>]

    Columns: n_p, expected_n, expected_m, q0. The log-log slope of the curve
    is printed after the table.
    """
    try:
        cfg, _ = shell.workspace.config(arg)
        points = theoretical_scaling_curve(utils.parse_grid(cfg['grid']), cfg['alpha'])
        table = pd.DataFrame([(p.n_p, p.expected_n, p.expected_m, p.q0) for p in points],
                             columns=['n_p', 'expected_n', 'expected_m', 'q0'])
        if cfg['out']:
            out = utils.validate_output_path(cfg['out'], 'theory')
            utils_io.write_table(table, out)
            utils_io.write_manifest(out, cfg, {'command': 'theory', 'kind': 'theory', 'rows': len(table)})
            utils.write_output(f"Wrote {len(table)} theory points to {out}.")
        else:
            shell.query_output(table)
        if len(points) >= 2:
            utils.write_output(f"log-log slope of M against N: {curve_slope(points):.6f}")
    except (IBNetError, OSError) as e:
        shell.report_error(e)
