"""Package-level error types, mapped to CLI exit codes in cubemix.cli."""


class CubemixError(Exception):
    pass


class BudgetExhaustedError(CubemixError):
    """Search budget ran out; carries the distance lower bound proven so far."""

    def __init__(self, lower_bound: int, nodes_expanded: int = 0):
        super().__init__(
            f"search budget exhausted; distance proven >= {lower_bound}"
        )
        self.lower_bound = lower_bound
        self.nodes_expanded = nodes_expanded


class MemoryGuardError(CubemixError):
    """An operation would exceed its memory budget."""


class DepthGuardError(CubemixError):
    """BFS depth above the memory guard without an explicit override."""


class CorruptManifestError(CubemixError):
    """Dataset manifest or shard digests failed verification."""
