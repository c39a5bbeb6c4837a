"""redgraph: a red-team workbench for graph-based RAG pipelines.

Builds a miniature GraphRAG index (chunks, entity graph, communities,
summaries), runs two corpus-manipulation attacks against it, and scores
the damage with graph-diff and QA metrics plus three baseline defenses.
Every model-backed step has a deterministic rule-based implementation so
the whole pipeline can run and be tested without any external service.
"""

__version__ = "0.1.0"
