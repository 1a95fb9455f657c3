"""Flows for the pipeline."""
