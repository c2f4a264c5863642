"""
Command handlers for the command-line interface.
"""

from .command_handlers import cmd_synth, cmd_verify, cmd_simulate, cmd_roa
from .error_handlers import exit_code_for, handle_error

__all__ = [
    'cmd_synth',
    'cmd_verify',
    'cmd_simulate',
    'cmd_roa',
    'exit_code_for',
    'handle_error'
]
