# Commands package
from .scan_command import run_scan_command
from .certify_command import run_certify_command
from .spectrum_command import run_spectrum_command
from .theorem_command import run_theorem_command
from .repro_command import run_repro_command
