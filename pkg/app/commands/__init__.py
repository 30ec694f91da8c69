"""
CLI subcommands; each module exposes NAME, register(subparsers) and run(config)
"""
from . import analyze, detect, filter_feedback, score, simulate

COMMANDS = {
    module.NAME: module
    for module in (simulate, detect, filter_feedback, analyze, score)
}

__all__ = ["COMMANDS", "analyze", "detect", "filter_feedback", "score", "simulate"]
