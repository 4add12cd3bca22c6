"""Models package: numerical value types and pydantic schemas."""
