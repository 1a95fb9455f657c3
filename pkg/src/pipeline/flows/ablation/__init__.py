"""Ablation flow."""
