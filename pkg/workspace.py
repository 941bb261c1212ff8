import os
import utils
import utils_io
from config import coerce_value, resolve_config
from errors import ParameterError


class Workspace:
    def __init__(self):
        """
        Session state shared by the shell commands: the current series, the
        current histogram and configuration overrides set with ``.config``.
        """
        self._series = None
        self._series_path = None
        self._hist = None
        self._hist_path = None
        self._overrides = {}

    def get_current_series_name(self):
        """
        Get the file name of the current series.

        Returns:
            str: Base name of the loaded series file, or None.
        """
        return os.path.basename(self._series_path) if self._series_path else None

    def get_current_series_path(self):
        return self._series_path

    def set_current_series(self, path):
        """
        Load a series file and make it current.

        Args:
            path (str): Series CSV path.

        Returns:
            NetworkSeries: The loaded series.
        """
        series = utils_io.read_series(path)
        self._series, self._series_path = series, path
        return series

    def series(self, path=''):
        """
        Series for a command: ``path`` when given, else the current series.

        Raises:
            ParameterError: If neither is available.
        """
        if path:
            if path == self._series_path and self._series is not None:
                return self._series
            return utils_io.read_series(path)
        if self._series is None:
            raise ParameterError("No series selected. Use '.use <series.csv>' or pass --series.")
        return self._series

    def histogram(self, path=''):
        """Histogram for a command: ``path`` when given, else the last one loaded or built."""
        if path:
            if path != self._hist_path or self._hist is None:
                self._hist = utils_io.read_histogram(path)
                self._hist_path = path
            return self._hist
        if self._hist is None:
            raise ParameterError("No histogram loaded. Pass --hist <hist.csv> or run .build-hist first.")
        return self._hist

    def remember_histogram(self, hist, path):
        self._hist, self._hist_path = hist, path

    def set_override(self, key, raw):
        """Set a session-wide configuration value (typed and validated)."""
        self._overrides[key] = coerce_value(key, raw)
        return self._overrides[key]

    def clear_overrides(self):
        self._overrides = {}

    def get_overrides(self):
        return dict(self._overrides)

    def config(self, arg):
        """
        Effective configuration for a command line.

        Args:
            arg (str): Raw argument string (``--key value`` pairs).

        Returns:
            tuple: (RunConfig, list of positional tokens).
        """
        flags, positionals = utils.parse_flags(arg)
        return resolve_config(flags, self._overrides), positionals
