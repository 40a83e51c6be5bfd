"""Assistant agents that mediate between users and recommender systems."""

__version__ = "0.1.0"
