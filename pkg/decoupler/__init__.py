"""
Decoupler - tunable-coupler circuit simulator

Quantizes a qubit-coupler-qubit circuit, finds the coupler flux at which
the qubits decouple, simulates CZ gates through that coupler and extends
the analysis to qubit chains.
"""

__version__ = "1.0.0"
