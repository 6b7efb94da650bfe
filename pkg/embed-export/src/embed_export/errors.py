class ExportError(Exception):
    """Any condition that should abort an export run."""
