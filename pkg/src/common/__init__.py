"""Commonly used functions."""
