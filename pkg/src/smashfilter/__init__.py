"""Action recognition and localization straight from simulated compressive camera measurements."""
__version__ = "0.1.0"
