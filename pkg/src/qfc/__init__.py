"""Exact quadratic form workbench."""
