"""
IBNet Shell: interactive and one-shot front end of the interbank network toolkit.

The shell itself only knows .help, .output, .mode and .exit. Every other
command is a ``do_<name>(shell, arg)`` function found in a module under
commands/, registered as ``.<name>`` with underscores shown as dashes.
"""
import cmd
import importlib.util
import inspect
import os
import shlex
import signal
import sys

import pandas as pd
from tabulate import tabulate

import utils
import workspace
from errors import IBNetError, ParameterError, exit_code_for

USAGE = """
Usage: ibnet-shell.py [-n] [-c <command> ...] | <command> [--key value ...]
    -n               Non-interactive mode.
    -c <command>     Queue a command (repeatable).
    <command> ...    Run a single command and exit, e.g. simulate --out run.csv --n-p 200
    -h, --help       Show this help message.
"""

RENDERERS = {
    'tabular': lambda df: tabulate(df, headers='keys', tablefmt='fancy_grid', showindex=False, floatfmt='.6g'),
    'markdown': lambda df: tabulate(df, headers='keys', tablefmt='pipe', showindex=False, floatfmt='.6g'),
    'csv': lambda df: df.to_csv(index=False, lineterminator='\n'),
    'json': lambda df: df.to_json(orient='records', indent=4),
    'html': lambda df: df.to_html(index=False),
    'raw': lambda df: df.to_csv(sep=' ', index=False, lineterminator='\n'),
}


def _summary(handler):
    doc = inspect.getdoc(handler) or ''
    return doc.splitlines()[0] if doc else ''


class IBNetShell(cmd.Cmd):
    def __init__(self, workspace_instance):
        """
        Initialize the shell and load the command plugins.

        Args:
            workspace_instance (Workspace): Session holding the current series, histogram and overrides.
        """
        super().__init__()
        self.workspace = workspace_instance
        self.output = ''
        self.outFormat = 'tabular'
        self.exit_code = 0
        self.command_mapping = {}
        self.command_families = {}
        for name in ('help', 'output', 'mode', 'exit'):
            self.add_command(name, getattr(type(self), f"do_{name}"), family='shell')
        self.load_plugins(os.path.join(os.path.dirname(os.path.abspath(__file__)), 'commands'))
        self.update_prompt()

    def load_plugins(self, directory):
        """Register the ``do_<name>`` functions of every module in ``directory``."""
        for file_name in sorted(os.listdir(directory)):
            if not file_name.endswith('.py') or file_name == '__init__.py':
                continue
            module_name = file_name[:-3]
            spec = importlib.util.spec_from_file_location(module_name, os.path.join(directory, file_name))
            module = importlib.util.module_from_spec(spec)
            sys.modules[module_name] = module
            spec.loader.exec_module(module)
            for attr, func in list(vars(module).items()):
                if attr.startswith('do_') and inspect.isfunction(func):
                    self.add_command(attr[3:], func, family=module_name)

    def add_command(self, command_name, func, family='shell'):
        """Bind ``func`` to the shell; ``build_hist`` becomes ``.build-hist``."""
        handler = func.__get__(self)
        # cmd.Cmd resolves bare words through do_* attributes.
        setattr(self, f"do_{command_name}", handler)
        dotted = f".{command_name.replace('_', '-')}"
        self.command_mapping[dotted] = handler
        self.command_families.setdefault(family, []).append(dotted)

    def completenames(self, text, *ignored):
        return [name for name in self.command_mapping if name.startswith(text)]

    def complete_help(self, text, line, begidx, endidx):
        return self.completenames(text)

    def do_help(self, arg):
        """
        List the commands, or show the full help of one.

        Usage:
            .help [command]
        """
        name = arg.strip()
        if not name:
            rows = [(family, command, _summary(self.command_mapping[command]))
                    for family in sorted(self.command_families)
                    for command in sorted(self.command_families[family])]
            utils.write_output(tabulate(rows, headers=['family', 'command', 'summary'], tablefmt='simple'))
            return
        command = name if name.startswith('.') else f".{name}"
        handler = self.command_mapping.get(command)
        if handler is None:
            self.exit_code = 1
            utils.write_output(f"Unknown command: {command}")
            return
        utils.write_output(f"{command}: {inspect.getdoc(handler) or 'No help available'}")

    def update_prompt(self):
        series_name = self.workspace.get_current_series_name()
        self.prompt = f'IBNet ({series_name})> ' if series_name else 'IBNet> '

    def do_exit(self, arg):
        """Exit the shell."""
        utils.write_output("Exiting IBNet Shell.")
        return True

    def emptyline(self):
        """Ignore empty lines."""

    def do_output(self, arg):
        """
        Send tables to stdout or append them to a file.

        Usage:
            .output stdout|<file>
        """
        try:
            _, positionals = utils.parse_flags(arg)
            if not positionals:
                utils.write_output("Usage: .output stdout|file_path")
                return
            target = positionals[0]
            if target.lower() == 'stdout':
                self.output = ''
                utils.write_output("Output set to stdout.")
                return
            self.output = utils.validate_output_path(target, 'output file')
            utils.write_output(f"Output set to file: {target}")
        except ParameterError as e:
            self.report_error(e)

    def do_mode(self, arg):
        """
        Choose how tables are rendered.

        Usage:
            .mode tabular|csv|json|html|markdown|raw
        """
        mode = arg.strip().lower()
        if mode not in RENDERERS:
            if mode:
                self.exit_code = 1
            utils.write_output(f"Usage: .mode {'|'.join(RENDERERS)}")
            return
        self.outFormat = mode
        utils.write_output(f"Output mode set to: {mode}")

    def report_error(self, error, context=''):
        """Print an error and remember its exit code for the process."""
        self.exit_code = exit_code_for(error)
        prefix = f"{context}: " if context else ''
        utils.write_output(f"Error: {prefix}{error}")

    def dispatch(self, line):
        """Run one dot-command line; returns True when the shell should stop."""
        command, _, args = line.strip().partition(' ')
        handler = self.command_mapping.get(command)
        if handler is None:
            self.exit_code = 1
            utils.write_output(f"Invalid command: {command}. Type .help for the list of commands.")
            return None
        try:
            return handler(args.strip())
        except (IBNetError, OSError) as e:
            self.report_error(e, command)
            return None

    def default(self, line):
        arg = line.strip()
        if arg.startswith('.'):
            return self.dispatch(arg)
        if arg:
            self.exit_code = 1
            utils.write_output("Invalid command. Commands start with '.', e.g. .simulate --out series.csv")
        return None

    def query_output(self, rows, columns=None):
        """Render a table (a DataFrame, or rows plus column names) in the current mode."""
        df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows, columns=columns)
        text = RENDERERS[self.outFormat](df)
        utils.write_output(text.rstrip('\n'), self.output)

    def execute_commands(self, cmds):
        """Run commands in order, adding a missing leading dot; stops after .exit."""
        for command in cmds:
            command = command.strip()
            if not command or command.startswith('#'):
                continue
            if not command.startswith('.'):
                command = f".{command}"
            if self.dispatch(command) is True:
                break

    def process_arguments(self, arguments):
        """
        Turn the process arguments into (interactive, commands).

        ``-n`` disables the prompt, ``-c <command>`` (or ``-c<command>``) queues a
        command, and the first bare word starts a single command that takes
        every remaining argument.
        """
        interactive = True
        cmds = []
        pending = list(arguments)
        while pending:
            arg = pending.pop(0)
            if arg == '-n':
                interactive = False
            elif arg == '-c':
                if pending and not pending[0].startswith('-'):
                    cmds.append(pending.pop(0).strip())
            elif arg.startswith('-c'):
                cmds.append(arg[2:].strip())
            elif arg in ('-h', '--help'):
                utils.write_output(USAGE)
                sys.exit(0)
            elif arg.startswith('-'):
                self.exit_code = 1
                utils.write_output(f"Unknown option: {arg}")
            else:
                cmds.append(f".{arg.lstrip('.')} {shlex.join(pending)}".strip())
                return False, cmds
        return interactive, cmds


if __name__ == "__main__":
    signal.signal(signal.SIGINT, utils.signal_handler)
    ibnet_shell = IBNetShell(workspace.Workspace())
    interactive_mode, commands = ibnet_shell.process_arguments(sys.argv[1:])
    ibnet_shell.execute_commands(commands)
    if interactive_mode:
        ibnet_shell.cmdloop("Welcome to IBNet Shell. Type '.exit' to quit.")
    sys.exit(ibnet_shell.exit_code)
