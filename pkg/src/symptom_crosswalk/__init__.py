"""Symptom inventory crosswalk engine.

Links items across self-report symptom inventories by embedding-space
text similarity and converts participant scores between them via
percentile calibration, with a within-inventory regression fallback for
weakly linked items, an evaluation harness, a CLI, and an HTTP service.
"""

__version__ = "0.1.0"
