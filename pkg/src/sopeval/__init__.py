"""sopeval: statement-of-purpose quality classification.

Feature extraction over three families (textual, word-embedding, similarity
and error based), five from-scratch classifiers, stratified cross-validation
with a feature-set ablation grid, and a small HTTP service that evaluates
essays with a persisted model.
"""

__version__ = "0.1.0"
