"""Discrete Lorenz attractor toolbox: maps, spectra, continuity test, charts."""

try:
    from ._dlorenz import *  # noqa: F401,F403  (installed package layout)
    from ._dlorenz import __version__  # noqa: F401
except ImportError:  # extension on PYTHONPATH next to the build tree
    from _dlorenz import *  # noqa: F401,F403
    from _dlorenz import __version__  # noqa: F401
