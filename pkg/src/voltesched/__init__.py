"""Downlink LTE scheduling simulator for mixed VoLTE / best-effort traffic."""

from . import bip, channel, config, experiment, metrics, ratemap, sched

__all__ = ["bip", "channel", "config", "experiment", "metrics", "ratemap", "sched"]
__version__ = "0.1.0"
