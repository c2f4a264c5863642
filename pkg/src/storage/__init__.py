"""
Storage package for run artifacts.
This package reads and writes controller files, run reports, traces and region-of-attraction output.
"""

# Import core file functions
from .core import read_json, write_json, sibling

# Import controller-related functions
from .controller_operations import save_controller, load_controller

# Import report-related functions
from .report_operations import (
    save_run_report, save_trace, load_trace, save_metrics, save_roa, ellipse_boundary
)

__all__ = [
    # Core
    'read_json', 'write_json', 'sibling',

    # Controller operations
    'save_controller', 'load_controller',

    # Report operations
    'save_run_report', 'save_trace', 'load_trace', 'save_metrics', 'save_roa', 'ellipse_boundary'
]
