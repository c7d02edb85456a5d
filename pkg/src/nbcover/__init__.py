"""Non-backtracking spectra of graphs and their random covers."""

__version__ = "0.1.0"
