"""Virtual-background forensics: co-occurrence features, detectors and attack robustness."""

__version__ = "0.1.0"
