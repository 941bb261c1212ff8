import sys
import shlex
from pathlib import Path
import numpy as np
from pathvalidate import ValidationError, validate_filepath
from errors import ParameterError


def write_output(message, destination='', mode='a'):
    """
    Writes a message to either stdout or a specified file.

    Args:
        message (str): The message to be written.
        destination (str, optional): File path to append to. Default is stdout.
        mode (str, optional): The mode for opening the file. Default is 'a' (append).

    Returns:
        None
    """
    try:
        if destination == '':
            print(message)
        else:
            with open(destination, mode, encoding='utf-8') as file:
                file.write(message + '\n')

    except OSError as e:
        print(f"Error writing message to file {destination}: {e}")


def signal_handler(sig, frame):
    """Handle Ctrl+C signal."""
    write_output('\nCtrl+C pressed. Exiting IBNet Shell.')
    sys.exit(0)


def parse_flags(arg):
    """
    Split a command argument string into ``--flag value`` pairs and positionals.

    A flag followed by another flag (or by nothing) is read as ``true``.
    Dashes inside flag names become underscores, so ``--n-p`` sets ``n_p``.

    Args:
        arg (str): Raw argument string typed after the command name.

    Returns:
        tuple: (dict of flag values as strings, list of positional tokens).

    Raises:
        ParameterError: If the string has unbalanced quotes.
    """
    try:
        tokens = shlex.split(arg or '')
    except ValueError as e:
        raise ParameterError(f"Cannot parse arguments: {e}") from e

    flags = {}
    positionals = []
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token.startswith('--') and len(token) > 2:
            key, sep, value = token[2:].partition('=')
            key = key.replace('-', '_')
            if sep:
                flags[key] = value
            elif i + 1 < len(tokens) and not tokens[i + 1].startswith('--'):
                flags[key] = tokens[i + 1]
                i += 1
            else:
                flags[key] = 'true'
        else:
            positionals.append(token)
        i += 1
    return flags, positionals


def parse_grid(text):
    """
    Parse an integer grid ``start:stop[:step]`` (inclusive stop) or a comma list.

    Args:
        text (str): e.g. ``20:400:10``, ``20:300`` or ``100,200,300``.

    Returns:
        list: Sorted unique integers.

    Raises:
        ParameterError: If the grid is empty or malformed.
    """
    try:
        if ':' in text:
            parts = [int(p) for p in text.split(':')]
            if len(parts) not in (2, 3):
                raise ValueError(text)
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step <= 0:
                raise ValueError("step must be positive")
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(',') if p.strip()]
    except ValueError as e:
        raise ParameterError(f"Invalid integer grid '{text}': {e}") from e

    if not values:
        raise ParameterError(f"Grid '{text}' is empty.")
    return sorted(set(values))


def parse_float_grid(text):
    """
    Parse a real grid ``start:stop:step`` (inclusive stop) or a comma list.

    Args:
        text (str): e.g. ``0.01:0.99:0.01``.

    Returns:
        numpy.ndarray: Grid values.
    """
    try:
        if ':' in text:
            start, stop, step = (float(p) for p in text.split(':'))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = start + step * np.arange(count)
        else:
            values = np.array([float(p) for p in text.split(',') if p.strip()])
    except ValueError as e:
        raise ParameterError(f"Invalid real grid '{text}': {e}") from e

    if values.size == 0:
        raise ParameterError(f"Grid '{text}' is empty.")
    return np.round(values, 12)


def validate_output_path(path, what='output'):
    """
    Check that ``path`` is a usable file path.

    Args:
        path (str): Candidate path.
        what (str, optional): Name used in the error message.

    Returns:
        str: The path unchanged.

    Raises:
        ParameterError: If the path is empty or invalid on this platform.
    """
    if not path:
        raise ParameterError(f"Missing {what} path (--out).")
    try:
        validate_filepath(Path(path), platform='auto')
    except ValidationError as e:
        raise ParameterError(f"Invalid {what} path '{path}': {e}") from e
    return path
