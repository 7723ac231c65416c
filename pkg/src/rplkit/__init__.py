"""Region-of-plausible-location (RPL) estimation for CDR-based localization."""

__version__ = "0.1.0"
