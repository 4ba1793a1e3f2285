"""Numerical laboratory for the Dikin process and primal-dual affine scaling."""

__version__ = "0.1.0"
