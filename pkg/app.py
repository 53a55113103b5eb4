"""
Main entry point of the lattice coset-code toolkit.

This module provides the application factory for the click command group.
Subcommands are organized in separate modules in the commands package.
"""

import logging
import sys

import click

from commands import register_commands
from services.errors import EXIT_USAGE, LatticeToolError
from storage import STDOUT, load_config

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


class ToolGroup(click.Group):
    """Click group with the toolkit's exit codes (usage errors exit 64)."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else 0
        except click.UsageError as exc:
            exc.show()
            code = EXIT_USAGE
        except click.ClickException as exc:
            exc.show()
            code = exc.exit_code
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = 1
        except LatticeToolError as exc:
            click.echo(f"Error: {exc}", err=True)
            code = exc.exit_code
        if standalone_mode:
            sys.exit(code)
        return code


def _load_config(ctx, param, value):
    """Eager --config callback: the file becomes the default_map."""
    if value is None:
        return None
    ctx.default_map = load_config(value)
    ctx.meta["config_content"] = dict(ctx.default_map)
    return value


def create_cli():
    """
    Application factory function to create and configure the CLI.

    Returns:
        click.Group: Configured command group
    """

    @click.group(cls=ToolGroup)
    @click.option("--config", type=click.Path(dir_okay=False), default=None, is_eager=True,
                  expose_value=False, callback=_load_config, help="JSON run configuration.")
    @click.option("--seed", type=int, default=0, show_default=True, help="Master random seed.")
    @click.option("--out", default=STDOUT, show_default=True, help="Output file, '-' for stdout.")
    @click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
    @click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default="WARNING",
                  show_default=True)
    @click.option("-v", "--verbose", is_flag=True, help="Shortcut for --log-level INFO.")
    @click.pass_context
    def cli(ctx, seed, out, fmt, log_level, verbose):
        """Well-rounded lattice coset codes for the fading wiretap channel."""
        level = logging.INFO if verbose and log_level.upper() == "WARNING" else getattr(logging, log_level.upper())
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
        logging.getLogger().setLevel(level)
        ctx.obj = {
            "seed": seed,
            "out": out,
            "format": fmt,
            "config": ctx.meta.get("config_content", {}),
        }

    # Register all subcommands
    register_commands(cli)

    return cli


def main():
    create_cli().main(prog_name="latticetool")


if __name__ == '__main__':
    main()
