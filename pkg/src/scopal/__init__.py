"""Self-play step-level policy optimization over small adversarial games."""

__version__ = "0.1.0"
