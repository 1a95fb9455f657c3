"""Experiment configuration, run directories and the command line."""
