from .base import (
    CAPABILITIES,
    GenerationParams,
    ProviderEndpointConfig,
    ProviderHub,
)
from .fixture import FixtureProvider
from .http import HttpProvider

__all__ = [
    "CAPABILITIES",
    "FixtureProvider",
    "GenerationParams",
    "HttpProvider",
    "ProviderEndpointConfig",
    "ProviderHub",
]
