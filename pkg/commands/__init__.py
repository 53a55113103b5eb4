"""
Commands Package - Register every subcommand on the CLI group
"""

from .search_commands import search_cmd
from .ideal_commands import ideal_scan_cmd
from .analyze_commands import analyze_cmd
from .simulate_commands import simulate_cmd


def register_commands(cli):
    """Attach all subcommands to the root click group."""
    cli.add_command(search_cmd)
    cli.add_command(ideal_scan_cmd)
    cli.add_command(analyze_cmd)
    cli.add_command(simulate_cmd)
