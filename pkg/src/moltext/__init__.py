"""Evaluation toolkit for molecule captioning and text-to-molecule generation."""

__version__ = "0.1.0"
