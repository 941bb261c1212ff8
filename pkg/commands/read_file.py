import os
import utils


def fetch_commands_from_file(file_name):
    """
    Read shell commands from a script, one per line.

    Blank lines and lines starting with '#' are skipped. A trailing backslash
    continues a command on the next line.

    Args:
        file_name (str): Script path.

    Returns:
        list: Command strings.
    """
    commands = []
    pending = ''
    with open(file_name, 'r', encoding='utf-8') as file:
        for line in file:
            stripped = line.strip()
            if not pending and (not stripped or stripped.startswith('#')):
                continue
            if stripped.endswith('\\'):
                pending += stripped[:-1] + ' '
                continue
            commands.append((pending + stripped).strip())
            pending = ''
    if pending.strip():
        commands.append(pending.strip())
    return commands


#command .read
def do_read(shell, arg):
    """
    Run the shell commands stored in a file.

    Usage:
        .read <script.ibnet>

    Commands run in order; a failing command is reported and the script
    continues. The process exit code reflects the last failure.
    """
    file_name = arg.strip()
    if not file_name:
        utils.write_output("Usage: .read <file>")
        return

    if not os.path.exists(file_name):
        shell.report_error(FileNotFoundError(f"File '{file_name}' not found."))
        return

    try:
        commands = fetch_commands_from_file(file_name)
    except (OSError, UnicodeDecodeError) as e:
        shell.report_error(OSError(f"Cannot read '{file_name}': {e}"))
        return

    utils.write_output(f"Running {len(commands)} command(s) from {file_name}.")
    shell.execute_commands(commands)
