"""PT-SUSY - shooting solver and SUSY partner construction for the PT-symmetric double-delta trap."""

__version__ = "1.0.0"
