"""Semantic-aware energy allocation in wireless powered IoT networks."""

__version__ = "0.1.0"
