import utils
import metrics
from config import DEFAULTS
from errors import IBNetError
from model import Simulated


#command .use
def do_use(shell, arg):
    """
    Load a series file and make it the current series.

    Args:
        arg (str): Path of a series CSV.
    """
    path = arg.strip()
    if not path:
        utils.write_output("Usage: .use <series.csv>")
        return

    try:
        series = shell.workspace.set_current_series(path)
        shell.update_prompt()
        utils.write_output(f"Switched to series '{path}' ({series.n_days} days, {len(series.bank_ids)} banks).")
    except (IBNetError, OSError) as e:
        shell.report_error(e, f"cannot load '{path}'")


#command .info
def do_info(shell, arg):
    """Show size, provenance and headline statistics of the current (or --series) series."""
    try:
        cfg, _ = shell.workspace.config(arg)
        series = shell.workspace.series(cfg['series'])
        provenance = series.provenance
        rows = [
            ('file', cfg['series'] or shell.workspace.get_current_series_path()),
            ('kind', 'simulated' if isinstance(provenance, Simulated) else 'ingested'),
            ('banks', len(series.bank_ids)),
            ('weighted', series.weighted),
        ]
        if isinstance(provenance, Simulated):
            rows.append(('seed', provenance.seed))
            rows.append(('alpha', provenance.params.alpha))
        if series.n_days and any(net.edges for net in series.networks):
            rows += list(metrics.summary_statistics(series).items())
        else:
            rows.append(('days', series.n_days))
        shell.query_output(rows, ['key', 'value'])
    except (IBNetError, OSError) as e:
        shell.report_error(e)


#command .config
def do_config(shell, arg):
    """
    Show or change the session configuration.

    Usage:
        .config                 show every key with its effective value
        .config <key> <value>   set a session override
        .config reset           drop all session overrides
    """
    parts = arg.split()
    try:
        if not parts:
            cfg, _ = shell.workspace.config('')
            overrides = shell.workspace.get_overrides()
            rows = [(key, value, 'session' if key in overrides else '', DEFAULTS[key][2])
                    for key, value in cfg.items()]
            shell.query_output(rows, ['key', 'value', 'source', 'description'])
        elif parts == ['reset']:
            shell.workspace.clear_overrides()
            utils.write_output("Session overrides cleared.")
        elif len(parts) == 2:
            key = parts[0].lstrip('-').replace('-', '_')
            value = shell.workspace.set_override(key, parts[1])
            utils.write_output(f"{key} set to {value}.")
        else:
            utils.write_output("Usage: .config [<key> <value> | reset]")
    except IBNetError as e:
        shell.report_error(e)
