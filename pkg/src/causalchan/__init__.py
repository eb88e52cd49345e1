"""Capacity, codes and attacks for q-ary channels with a causal adversary.

The adversary sees the transmitted word one symbol at a time and may
substitute up to a fraction p of the symbols and erase up to a fraction p*.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .capacity import CapacityResult, alpha_q, capacity, capacity_of, grid_oracle
from .params import ChannelParams, ParameterError
from .qmath import DomainError, hamming_ball_volume, lemma1_margin, plotkin_bound, q_entropy

__all__ = [
    "CapacityResult", "ChannelParams", "DomainError", "ParameterError", "alpha_q", "capacity",
    "capacity_of", "grid_oracle", "hamming_ball_volume", "lemma1_margin", "plotkin_bound", "q_entropy",
]
