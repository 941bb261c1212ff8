import utils
import utils_io
from halo import Halo
from tqdm import tqdm
from errors import IBNetError
from inference import fit_scaling, scaling_sweep
from model import simulate_series, simulate_varying_series


#command .simulate
def do_simulate(shell, arg):
    """
    Run the model and write the retained days as a series CSV.

    Usage:
        .simulate --out <series.csv> [--n-p 300] [--seed 7] [--alpha 4] [--weighted false] ...
        .simulate --out <series.csv> --n-p-path <estimates.csv> [--burn-in 5000] ...

    Every configuration key can be given as a flag; the effective values are
    written to <series.csv>.manifest. The new series becomes the current one.

    With --n-p-path, N_P follows the n_p_ml column of an .estimate-np table,
    one retained day per row; days outside the histogram range repeat the
    previous in-range estimate. n_p and horizon are then taken from the path.
    """
    spinner = Halo(text='Simulating...', spinner='line')
    try:
        cfg, _ = shell.workspace.config(arg)
        out = utils.validate_output_path(cfg['out'], 'series')
        wp = cfg.weight_params() if cfg['weighted'] else None

        if cfg['n_p_path']:
            n_p_path = utils_io.read_np_path(cfg['n_p_path'])
            cfg = cfg.replace(n_p=max(n_p_path), horizon=cfg['burn_in'] + len(n_p_path))
            spinner.start(f"Simulating {len(n_p_path)} days with N_P from {cfg['n_p_path']}...")
            series = simulate_varying_series(n_p_path, cfg.model_params(), wp, seed=cfg['seed'],
                                             weighted=cfg['weighted'])
        else:
            params = cfg.model_params()
            spinner.start(f"Simulating {params.horizon} days with N_P={params.n_p}...")
            series = simulate_series(params, wp, seed=cfg['seed'], weighted=cfg['weighted'])
        utils_io.write_series(series, out, cfg, 'simulate')
        spinner.succeed(f"Simulation completed: {series.n_days} days written to {out}.")

        shell.workspace.set_current_series(out)
        shell.update_prompt()
    except (IBNetError, OSError) as e:
        spinner.fail('Simulation failed!')
        shell.report_error(e)
    finally:
        spinner.stop()


#command .sweep
def do_sweep(shell, arg):
    """
    Daily (N, M) over an N_P grid and the log-log fit of M against N.

    Usage:
        .sweep [--sweep-grid 50:350:50] [--sweep-days 100] [--workers 4] [--out points.csv]

    Each grid value runs burn_in activity-only days, then sweep_days sampled
    days without weights. With --out, the points are written as n_p,day,n,m.
    """
    try:
        cfg, _ = shell.workspace.config(arg)
        grid = utils.parse_grid(cfg['sweep_grid'])
        params = cfg.model_params()
        out = utils.validate_output_path(cfg['out'], 'points') if cfg['out'] else ''

        with tqdm(total=len(grid), desc="Sweep", unit="N_P", dynamic_ncols=True) as progress_bar:
            points = scaling_sweep(grid, params, cfg['sweep_days'], seed=cfg['seed'],
                                   workers=cfg['workers'], progress=progress_bar)
        if out:
            utils_io.write_table(points, out)
            utils_io.write_manifest(out, cfg, {'command': 'sweep', 'kind': 'points', 'rows': len(points)})
            utils.write_output(f"Wrote {len(points)} points to {out}.")

        fit = fit_scaling(zip(points['n'], points['m']))
        shell.query_output([(fit.beta, fit.intercept, fit.r2, fit.n_points)],
                           ['beta', 'intercept', 'r2', 'n_points'])
    except (IBNetError, OSError) as e:
        shell.report_error(e)
