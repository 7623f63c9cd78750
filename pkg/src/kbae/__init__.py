"""Knowledge-base autoencoder feedback for RIS phase-shift matrices."""

__version__ = "0.1.0"
