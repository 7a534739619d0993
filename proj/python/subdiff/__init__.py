# SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
# SPDX-License-Identifier: Apache-2.0

"""Subgraph differential testing of DL operators."""

import json

from ._core import (
    BackendUnavailable,
    ParseError,
    TraceStore,
    ValidationError,
    ValidityError,
    cli,
    execute,
    generate,
    ingest,
    mine,
    ops,
)
from ._core import metrics as _metrics
from ._core import run as _run

__all__ = [
    "BackendUnavailable",
    "ParseError",
    "TraceStore",
    "ValidationError",
    "ValidityError",
    "cli",
    "execute",
    "generate",
    "ingest",
    "metrics",
    "mine",
    "ops",
    "patterns_corpus",
    "run",
]


def patterns_corpus(mined):
    """Merges the per-pattern corpora returned by mine() into one corpus JSON."""
    graphs = []
    for m in mined:
        graphs.extend(json.loads(m["corpus"]))
    return json.dumps(graphs)


def run(patterns_json, store, cases=10, seed=0, backend_a="ref-f32", backend_b="ref-f64",
        threshold=1e-3, op_thresholds=None, jobs=0):
    """Runs a campaign and returns (reports, stats) as parsed JSON objects."""
    reports, stats = _run(patterns_json, store, cases, seed, backend_a, backend_b, threshold,
                          op_thresholds or {}, jobs)
    return [json.loads(r) for r in reports], json.loads(stats)


def metrics(reports, stats=None):
    """Campaign metrics for reports given as dicts or JSON lines."""
    lines = [r if isinstance(r, str) else json.dumps(r) for r in reports]
    if stats is not None and not isinstance(stats, str):
        stats = json.dumps(stats)
    return json.loads(_metrics(lines, stats))
