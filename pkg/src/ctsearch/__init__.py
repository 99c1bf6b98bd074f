"""Concept search over annotated mathematical corpora.

Lemma-level phrase search, knowledge-base linking, and terminology
evaluation for CONLL-U annotated text collections.
"""

__version__ = "0.1.0"
