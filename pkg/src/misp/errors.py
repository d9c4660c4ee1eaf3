class ResourceLimitError(RuntimeError):
    """An exhaustive computation was asked to run above its configured size limit."""
