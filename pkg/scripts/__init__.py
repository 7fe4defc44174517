"""Scripts de exploración del toolkit."""
