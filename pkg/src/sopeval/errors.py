"""Exception hierarchy. Every error names the subsystem it came from so the
CLI can attribute failures in its diagnostics."""


class SopevalError(Exception):
    """Base class for all package errors."""

    module = "sopeval"

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class CorpusError(SopevalError):
    module = "corpus"


class ResourceError(SopevalError):
    module = "resources"


class TextualError(SopevalError):
    module = "textual"


class EmbeddingError(ResourceError):
    module = "embeddings"


class FeatureError(SopevalError):
    module = "features"


class ModelError(SopevalError):
    module = "classifiers"


class EvaluationError(SopevalError):
    module = "evaluation"


class ServiceError(SopevalError):
    module = "service"
