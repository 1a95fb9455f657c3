"""Holds the prefect pipelines."""
