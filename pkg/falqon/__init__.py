# ruff: noqa: F401
from . import (
    cli,
    engine,
    experiment,
    graph,
    plot,
    statevector,
    util,
)
from .version import __version__
