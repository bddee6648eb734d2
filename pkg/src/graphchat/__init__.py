"""graphchat: knowledge-graph RAG engine for documentation corpora."""

__version__ = "0.1.0"
