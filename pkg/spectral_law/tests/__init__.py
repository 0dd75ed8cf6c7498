# tests/__init__.py - Test package initialization
"""
Test package for the spectral-law engine.
"""

from .test_system import run_all_tests

__all__ = ['run_all_tests']
