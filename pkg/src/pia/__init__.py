"""Phase-integral correction engine."""
