"""Human-bot collaborative architecting engine.

Drives an architect's natural-language architecture story through
LLM-assisted requirements analysis, UML-subset model synthesis, and
scenario-based evaluation, with byte-replayable sessions and an
append-only provenance ledger.
"""

__version__ = "0.1.0"
