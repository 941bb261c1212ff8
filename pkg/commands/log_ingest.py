import utils
import utils_io
import pandas as pd
from halo import Halo
from ingest import (build_daily_networks, filter_overnight, parse_transactions, parse_window,
                    synthesize_transactions, write_transactions)
from errors import IBNetError, ParameterError


def rejects_path(path):
    return f"{path}.rejects.csv"


#command .ingest
def do_ingest(shell, arg):
    """
    Build a series from a transaction log.

    Usage:
        .ingest --log <log.csv> --out <series.csv> [--categories ON,ONL]
                [--window-start 08:00] [--window-end 18:00]

    Rejected rows are written to <series.csv>.rejects.csv as line,reason.
    The new series becomes the current one.
    """
    spinner = Halo(text='Reading transaction log...', spinner='line')
    try:
        cfg, _ = shell.workspace.config(arg)
        if not cfg['log']:
            raise ParameterError("Missing transaction log path (--log).")
        out = utils.validate_output_path(cfg['out'], 'series')
        window = parse_window(cfg['window_start'], cfg['window_end'])
        categories = [c.strip() for c in cfg['categories'].split(',') if c.strip()]

        spinner.start()
        with open(cfg['log'], 'r', encoding='utf-8') as stream:
            records, rejects = parse_transactions(stream)
        spinner.text = 'Building daily networks...'
        series = build_daily_networks(filter_overnight(records, categories), window, source=cfg['log'])
        utils_io.write_series(series, out, cfg, 'ingest')
        utils_io.write_table(pd.DataFrame([(r.line, r.reason) for r in rejects], columns=['line', 'reason']),
                             rejects_path(out))
        spinner.succeed(f"Ingested {len(records)} records into {series.n_days} days; {len(rejects)} rejected.")

        shell.workspace.set_current_series(out)
        shell.update_prompt()
    except (IBNetError, OSError) as e:
        spinner.fail('Ingestion failed!')
        shell.report_error(e)
    finally:
        spinner.stop()


#command .synthesize
def do_synthesize(shell, arg):
    """
    Write the current (or --series) series as a transaction log.

    Usage:
        .synthesize --out <log.csv> [--start-date 2000-01-03] [--seed 0]

    Days map to consecutive business days; each edge becomes one to three
    tickets summing to its weight.
    """
    try:
        cfg, _ = shell.workspace.config(arg)
        out = utils.validate_output_path(cfg['out'], 'log')
        series = shell.workspace.series(cfg['series'])
        window = parse_window(cfg['window_start'], cfg['window_end'])
        try:
            records = synthesize_transactions(series, cfg['start_date'], seed=cfg['seed'], window=window)
        except ValueError as e:
            raise ParameterError(f"Invalid start date '{cfg['start_date']}': {e}") from e
        write_transactions(records, out)
        utils.write_output(f"Wrote {len(records)} transactions to {out}.")
    except (IBNetError, OSError) as e:
        shell.report_error(e)
