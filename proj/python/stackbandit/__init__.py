"""Leader learning in contextual Stackelberg games (native core)."""

import json as _json

from . import _core
from ._core import (
    Game,
    Oful,
    best_response,
    embedding_parameter,
    extreme_points,
    flat_index,
    generate_game,
    h_embedding,
    loglog_slope,
    simplex_grid,
    utility_vector,
)

__all__ = [
    "Game",
    "Oful",
    "auction_policy_bid",
    "best_response",
    "embedding_parameter",
    "extreme_points",
    "flat_index",
    "game_from_dict",
    "generate_game",
    "h_embedding",
    "loglog_slope",
    "persuasion_policy_signal",
    "regret_from_logs",
    "run_experiment",
    "simplex_grid",
    "utility_vector",
]


def game_from_dict(doc):
    return Game(_json.dumps(doc))


def _text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def auction_policy_bid(spec, z, omega):
    return _core.auction_policy_bid(_text(spec), z, omega)


def persuasion_policy_signal(spec, z, omega):
    return _core.persuasion_policy_signal(_text(spec), z, omega)


def run_experiment(config, out=None):
    """Run a config (dict or JSON text); returns the summary dict."""
    return _json.loads(_core.run_experiment(_text(config), out))


def regret_from_logs(directory):
    return _json.loads(_core.regret_from_logs(str(directory)))
