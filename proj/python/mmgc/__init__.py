"""Semi-supervised learning with max-margin graph cuts."""

import json as _json

from ._core import (  # noqa: F401
    ConvergenceError,
    Error,
    InvalidArgument,
    Kernel,
    Model,
    ParseError,
    SingularSystem,
    bound_report,
    harmonic,
    inductive_error,
    knn_graph,
    largest_laplacian_eigenvalue,
    radius_graph,
    soft_harmonic,
    stability_beta,
    synthetic,
    synthetic_study,
    train_graph_cut,
    train_lapsvm,
    train_svm,
    transductive_error,
    uci_protocol,
)


def load_report(text):
    """Parses a report JSON string into a dict."""
    return _json.loads(text)
