"""Gateway IDS simulator, agents and evaluation statistics."""

from ._edgeids import *  # noqa: F401,F403
from ._edgeids import ConfigError, RangeError

ACTIONS = ("rate_limit", "syn_throttle", "block", "source_filter")
