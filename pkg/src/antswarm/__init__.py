"""Artificial ant colonies foraging on grayscale image habitats."""
