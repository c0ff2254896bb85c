import sys

from mimopilot.config import SIGNIFICANT_DIGITS


def write_line(line):
    sys.stdout.write("\r" + line)
    sys.stdout.write("\n")
    sys.stdout.flush()


def format_objective(value, digits=SIGNIFICANT_DIGITS):
    """Format an objective value with a fixed number of significant digits."""
    return f"{value:.{digits}g}"
