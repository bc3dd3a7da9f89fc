"""Collective illness timelines from first-person forum narratives.

The package turns a snapshot of self-reported illness diaries into a
day-aligned picture of what posters talk about and how they feel:
posts are split into day-stamped segments, segments are modelled as a
bipartite document-word graph with a nested degree-corrected blockmodel,
emotion proportions are scored against a word-emotion lexicon, and the
per-day trends are smoothed, correlated, clustered, and embedded in 2-D.
"""

__version__ = "0.1.0"
