"""Low-light surveillance toolkit: flow, two-stream classification, SVM fusion,
and an edge-to-cloud alert relay."""

__version__ = "0.1.0"
