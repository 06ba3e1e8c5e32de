class SchemaMismatchError(Exception):
    """An input file does not match the documented harness CSV schema."""
