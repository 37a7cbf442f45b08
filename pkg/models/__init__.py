"""Surfaces, moves, oracles and constructions."""
