"""clinlab: a clinical tabular analytics workbench engine.

Typed CSV ingestion with schema validation, cohort selection with
flowchart accounting, from-scratch hypothesis tests, discrete Bayesian
network structure learning and exact inference, an SMO-trained RBF
support vector classifier with cross-validated parameter screening,
a deterministic synthetic reference cohort, portable model artifacts,
and an HTTP facade plus CLI over all of it.
"""

from .errors import ClinlabError

__version__ = "0.1.0"

__all__ = ["ClinlabError", "__version__"]
