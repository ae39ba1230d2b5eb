"""Topic-guided research ideation over an embedded conference-paper corpus."""

__version__ = "0.1.0"
