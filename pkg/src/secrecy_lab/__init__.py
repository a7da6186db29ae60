"""Exact desk-scale experiments on secrecy from channel resolvability."""

__version__ = "0.1.0"
SCHEMA_VERSION = 1
