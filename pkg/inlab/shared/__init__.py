"""Shared infrastructure: environment config, logging setup and error types."""
