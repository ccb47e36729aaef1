"""Decision support for incremental release planning.

Estimates per-requirement effort with use case points, selects the next
release's requirement subset under time/precedence/coupling constraints,
and rescales inputs between cycles from delivered-release feedback.
"""

__version__ = "0.1.0"
