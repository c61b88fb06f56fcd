"""Yang-Lee edge criticality toolkit for a lossy transverse-field Ising chain."""

__version__ = "0.1.0"
