"""NLI in multi-span, SRS-affected WDM links: EGN model and split-step reference."""

from .core import Channel, ChannelPlan, ConfigError, Configuration, Link, Span, Tabulated, validate
from .modulation import BUILTIN_FORMATS, ModulationFormat, get_format, phi, psi

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_FORMATS", "Channel", "ChannelPlan", "ConfigError", "Configuration", "Link", "ModulationFormat",
    "Span", "Tabulated", "get_format", "phi", "psi", "validate",
]
