"""
Link schemes under comparison.
"""

from svdfbmc.schemes.base import BaseScheme, LinkOutput, SchemeManager
from svdfbmc.schemes.awgn import AwgnScheme
from svdfbmc.schemes.ofdm import OfdmScheme
from svdfbmc.schemes.fbmc import (
    FbmcScheme,
    FinerScheme,
    ProposedScheme,
    SmoothedSubchannelScheme,
    SubchannelScheme,
)


def register_schemes(scheme_manager: SchemeManager) -> SchemeManager:
    """
    Register the available schemes with the scheme manager.

    Args:
        scheme_manager (SchemeManager): Scheme manager to register schemes with

    Returns:
        SchemeManager: The same manager
    """
    scheme_manager.register_scheme("ofdm", OfdmScheme)
    scheme_manager.register_scheme("sc", SubchannelScheme)
    scheme_manager.register_scheme("sc-smooth", SmoothedSubchannelScheme)
    scheme_manager.register_scheme("finer", FinerScheme)
    scheme_manager.register_scheme("proposed", ProposedScheme)
    # Calibration only
    scheme_manager.register_scheme("awgn", AwgnScheme)
    return scheme_manager


def default_manager() -> SchemeManager:
    """Scheme manager with every scheme registered."""
    return register_schemes(SchemeManager())


__all__ = [
    "AwgnScheme",
    "BaseScheme",
    "FbmcScheme",
    "FinerScheme",
    "LinkOutput",
    "OfdmScheme",
    "ProposedScheme",
    "SchemeManager",
    "SmoothedSubchannelScheme",
    "SubchannelScheme",
    "default_manager",
    "register_schemes",
]
