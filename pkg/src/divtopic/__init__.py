"""Diverse topic modeling: PLSA/LDA plus variants where a size-reinforced
random walk on a topic similarity network merges redundant topics during
inference, with topic-selection baselines and summarization metrics."""

__version__ = "0.1.0"

from ._backend import backend_name

__all__ = ["backend_name", "__version__"]
