"""Exception types shared across the package.

ConfigError maps to CLI exit code 1, DataError to exit code 2.
"""


class EfdpError(Exception):
    pass


class ConfigError(EfdpError):
    """Bad configuration or usage: unknown keys, missing paths, invalid dims."""


class DataError(EfdpError):
    """Malformed input data: treebanks, embedding files, model files."""


class ConllError(DataError):
    """CoNLL parse failure; message carries the 1-based line number."""


class TreeError(DataError):
    """A sentence whose head indices do not form a single-rooted tree."""
