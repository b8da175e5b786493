"""Numeric tensor calculus for the synectic metric on tangent bundles."""
