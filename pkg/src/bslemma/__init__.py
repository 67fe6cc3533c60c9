"""Supported points, doubling estimates and non-doubling witnesses for finite
configurations in metric spaces."""

__version__ = "0.1.0"
