"""Set, curve and library builders plus their file and figure helpers."""
