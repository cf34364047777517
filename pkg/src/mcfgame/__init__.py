"""Deterministic two-player game approximation of obstacle mean curvature flow."""
from .game import GameConfig, GameState, PaulMove, CarolMove, Outcome, Termination, play, step, round_count

__version__ = "0.1.0"
