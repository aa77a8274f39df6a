"""Bistable oscillator toolkit: regimes, basins, ISS certificates, networks."""

import json as _json
import os as _os

from ._core import *  # noqa: F401,F403
from ._core import __version__, _run_experiment_json


def run_experiment(config, out_dir=None, threads=1):
    """Run an experiment from a config dict (same schema as ``bb --config``).

    Returns ``(summary, files)``.
    """
    return _run_experiment_json(_json.dumps(config), _os.fspath(out_dir or ""), threads)
