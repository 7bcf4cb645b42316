"""
Logging setup and exception types shared by every qkd_security module
"""

import logging

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def configure_logging(level: str = "INFO") -> None:
    """
    Configure root logging the same way for the CLI and for scripts

    Args:
        level (str): Logging level name (DEBUG, INFO, WARNING, ...)
    """
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise ConfigError(f"Unknown log level: {level}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)


class QkdError(Exception):
    """Base class for every error raised by qkd_security"""


class DimensionMismatchError(QkdError, ValueError):
    """Lengths or subsystem dimensions do not agree"""


class ResourceCapError(QkdError):
    """A dimension or enumeration cap would be exceeded"""


class ImpossibleTranscriptError(QkdError):
    """Conditioning on an event of probability zero"""


class NonHermitianError(QkdError, ValueError):
    """Operator expected to be Hermitian is not, within tolerance"""


class CodeSpecError(QkdError, ValueError):
    """Malformed or rank-deficient ECC+PA code"""


class ProtocolOrderError(QkdError):
    """A protocol message was read or sent out of order"""


class ConfigError(QkdError):
    """Invalid run configuration, preset name or suite name"""
