"""Tools for one-dimensional shift spaces and their two-dimensional
space-time dynamics: a marker/bracket automaton with logarithmic information
propagation, a cycle machine realizing prescribed dependency slopes, exact
rational slope programs, and analysis helpers (determined regions, prediction
polygons, one-sided Lyapunov profiles, blocking-word searches)."""

__version__ = "0.1.0"
