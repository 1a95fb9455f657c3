"""Training flow."""
