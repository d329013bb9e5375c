"""Example programs shipped with the package."""
