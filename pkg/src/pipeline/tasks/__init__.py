"""Tasks for the pipeline."""
