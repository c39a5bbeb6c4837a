"""Exception hierarchy; exit codes used by the CLI."""


class RedgraphError(Exception):
    """Base class for all workbench errors."""

    exit_code = 1


class ConfigError(RedgraphError):
    """Invalid configuration file, flag value, or parameter combination."""

    exit_code = 2


class ProviderError(RedgraphError):
    """A model provider failed (transport, bad response, missing model)."""

    exit_code = 3


class DataError(RedgraphError):
    """Corpus, index, or fixture data is missing, stale, or inconsistent."""

    exit_code = 4


class TargetingError(DataError):
    """No entity extracted from the query matches the graph."""


class AttackError(ProviderError):
    """An attack run failed on every chunk it touched."""
