"""Rule mining for categorical data via correspondence analysis, plus Bayesian rule list training."""

__version__ = "0.1.0"
