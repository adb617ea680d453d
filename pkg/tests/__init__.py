"""
Decoupler - Test Suite

Tests for the circuit model, crosstalk metrics, idle-point searches, gate
dynamics, chains and the CLI.
Run with: pytest tests/
"""
