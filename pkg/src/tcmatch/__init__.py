"""Continuous subgraph matching over temporal edge streams with timestamp-order constraints."""

from __future__ import annotations

from .dag import QueryDag, best_dag, build_dag, reverse
from .engine import MatchReport, StreamEngine, run
from .graph import Edge, GraphError, Snapshot, TemporalGraph, TimestampRegression
from .io import ParseError, parse_query, parse_query_text, parse_stream, parse_stream_text
from .matcher import Embedding, Matcher, MatchOptions
from .maxmin import CandidateIndex, MaxMinTable
from .query import QueryEdge, QueryError, TemporalOrder, TemporalQuery, validate_query

__all__ = [
    "CandidateIndex",
    "Edge",
    "Embedding",
    "GraphError",
    "MatchOptions",
    "MatchReport",
    "Matcher",
    "MaxMinTable",
    "ParseError",
    "QueryDag",
    "QueryEdge",
    "QueryError",
    "Snapshot",
    "StreamEngine",
    "TemporalGraph",
    "TemporalOrder",
    "TemporalQuery",
    "TimestampRegression",
    "best_dag",
    "build_dag",
    "parse_query",
    "parse_query_text",
    "parse_stream",
    "parse_stream_text",
    "reverse",
    "run",
    "validate_query",
]

__version__ = "0.1.0"
