import utils
import utils_io
from tqdm import tqdm
from inference import build_conditional_histogram
from errors import IBNetError


#command .build-hist
def do_build_hist(shell, arg):
    """
    Build the conditional histogram f(N, M | N_P) by simulation.

    Usage:
        .build-hist --out <hist.csv> [--grid 20:400:10] [--replicates 500] [--workers 8]
                    [--w-n 5] [--w-m 20] [--smoothing 1] [--hist-days 1] [--hist-burn-in 5000]

    Every (N_P, replicate) cell is an independent seeded run, so the result
    does not depend on the worker count.
    """
    try:
        cfg, _ = shell.workspace.config(arg)
        out = utils.validate_output_path(cfg['out'], 'histogram')
        grid = utils.parse_grid(cfg['grid'])
        params = cfg.model_params()

        total = len(grid) * cfg['replicates']
        with tqdm(total=total, desc="Histogram", unit="run", dynamic_ncols=True) as progress_bar:
            hist = build_conditional_histogram(
                grid, params, cfg['replicates'], (cfg['w_n'], cfg['w_m']),
                smoothing=cfg['smoothing'], seed=cfg['seed'], days=cfg['hist_days'],
                burn_in=cfg['hist_burn_in'], workers=cfg['workers'], progress=progress_bar,
            )
        utils_io.write_histogram(hist, out, cfg)
        shell.workspace.remember_histogram(hist, out)
        utils.write_output(f"Histogram over {len(grid)} N_P values ({hist.n_bins} x {hist.m_bins} bins) written to {out}.")
    except (IBNetError, OSError) as e:
        shell.report_error(e)
