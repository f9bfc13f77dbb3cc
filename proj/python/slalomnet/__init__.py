"""Slalom steering pilot: plant simulation, feature encoding, the CNN
regressor and the experiment pipeline, backed by the C++ core."""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
    from ._core import __version__  # noqa: F401
except ImportError:  # development layout: _core on sys.path from the build tree
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
