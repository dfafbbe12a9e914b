"""Experiment harness: configuration, normalization, runners, CSV artifacts."""
