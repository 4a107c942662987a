"""Clean Descriptors: rules-based scrubbing of free-text values."""
