"""Finite models of enriched category theory: shape posets for bimodule
operads, quivers and their coend tensor, precategories, Segal objects,
enriched presheaves and correspondences."""

__version__ = "0.1.0"
