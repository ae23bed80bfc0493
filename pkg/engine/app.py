"""
Command line application for heatpack
"""
import logging
import sys

import click

from config.settings import get_config

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(config_class):
    """Log to stderr so reports on disk and stdout stay byte-stable"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, str(config_class.LOG_LEVEL).upper(), logging.INFO))


def create_cli(config_class=None):
    """Application factory pattern"""

    @click.group()
    @click.option('--env', default=None, help='Settings profile: development, production, testing.')
    @click.pass_context
    def cli(ctx, env):
        """Heat packets, observability constants and optimal observation sets"""
        settings = config_class or get_config(env)
        configure_logging(settings)
        ctx.ensure_object(dict)
        ctx.obj['settings'] = settings

    # Register subcommands
    from commands.decompose import decompose_cmd
    from commands.design import design_cmd
    from commands.observe import observe_cmd
    from commands.validate import validate_cmd
    from commands.kernel import kernel_cmd

    cli.add_command(decompose_cmd)
    cli.add_command(design_cmd)
    cli.add_command(observe_cmd)
    cli.add_command(validate_cmd)
    cli.add_command(kernel_cmd)

    return cli
