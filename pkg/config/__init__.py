"""
Configuration package for mfbatch.
"""
from .paths import Paths
from .settings import Settings

__all__ = ['Paths', 'Settings']
