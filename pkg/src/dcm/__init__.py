"""Doubly cross-correlating imaging of sound-soft obstacles from passive data."""
