"""HTTP evaluation service: a persisted model serves accept/reject verdicts
with a per-feature breakdown. Read-only after startup; essays are never
written to disk. Endpoints: POST /v1/evaluate, GET /v1/health."""

from __future__ import annotations

import json
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .classifiers import TrainedModel, decision_value, label_for
from .errors import ServiceError
from .features import Featurizer, PipelineResources
from .textual import TextualError

MAX_TEXT_CHARS = 100_000
_MAX_BODY_BYTES = 4 * MAX_TEXT_CHARS + 4096


@dataclass(frozen=True)
class EvaluationResponse:
    label: str
    decision_value: float
    feature_breakdown: tuple  # (name, raw value, standardized value)
    warnings: tuple
    model_id: str

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "decision_value": self.decision_value,
            "feature_breakdown": [
                {"name": n, "raw": r, "standardized": s} for n, r, s in self.feature_breakdown
            ],
            "warnings": list(self.warnings),
            "model_id": self.model_id,
        }


def evaluate_essay(
    text: str,
    trained: TrainedModel,
    resources: PipelineResources,
    model_id: str | None = None,
) -> EvaluationResponse:
    """The single predict path shared by the CLI and the HTTP service."""
    featurizer = Featurizer(trained.config, resources.with_reference(trained.reference))
    vector = featurizer.vector(text)
    raw = vector.values
    if trained.standardizer is not None:
        standardized = trained.standardizer.transform(raw[None, :])[0]
    else:
        standardized = raw
    value = decision_value(trained, raw)
    breakdown = tuple(
        (name, float(r), float(s)) for name, r, s in zip(vector.names, raw, standardized)
    )
    return EvaluationResponse(
        label=label_for(value),
        decision_value=value,
        feature_breakdown=breakdown,
        warnings=vector.warnings,
        model_id=model_id if model_id is not None else trained.model_id,
    )


@dataclass
class ServiceState:
    """Shared read-only state; model may be absent while loading."""

    model: TrainedModel | None = None
    resources: PipelineResources | None = None
    model_id: str | None = None
    verbose: bool = False

    @classmethod
    def ready(cls, model: TrainedModel, resources: PipelineResources, verbose: bool = False):
        return cls(model=model, resources=resources, model_id=model.model_id, verbose=verbose)

    def health(self) -> dict:
        if self.model is None:
            return {"status": "loading", "model_id": None, "feature_config_hash": None}
        return {
            "status": "ok",
            "model_id": self.model_id,
            "feature_config_hash": self.model.config_hash,
        }


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState  # assigned by create_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        if self.state.verbose:
            super().log_message(fmt, *args)

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def do_OPTIONS(self):  # CORS preflight for the browser client
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, self.state.health())
        else:
            self._send(404, {"error": f"unknown path {self.path}"})

    def do_POST(self):
        if self.path != "/v1/evaluate":
            self._send(404, {"error": f"unknown path {self.path}"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        if length > _MAX_BODY_BYTES:
            self._send(413, {"error": "request body too large"})
            return
        try:
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._send(400, {"error": "body must be a JSON object with a 'text' field"})
            return
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            self._send(400, {"error": "body must be a JSON object with a 'text' field"})
            return
        text = payload["text"]
        if len(text) > MAX_TEXT_CHARS:
            self._send(413, {"error": f"text exceeds {MAX_TEXT_CHARS} characters"})
            return
        if not text.strip():
            self._send(422, {"error": "text must be non-empty"})
            return
        if self.state.model is None:
            self._send(503, {"error": "model not loaded"})
            return
        try:
            response = evaluate_essay(
                text, self.state.model, self.state.resources, self.state.model_id
            )
        except TextualError:
            self._send(422, {"error": "text contains no word tokens"})
            return
        except Exception as exc:  # keep the service alive on pipeline errors
            self._send(500, {"error": str(exc)})
            return
        self._send(200, response.to_dict())


def create_server(state: ServiceState, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bound, ready-to-serve HTTP server; port 0 picks a free port. The
    caller drives serve_forever()/shutdown()."""
    if state.resources is None and state.model is not None:
        raise ServiceError("service state has a model but no resources")
    handler = type("BoundHandler", (_Handler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def serve(state: ServiceState, host: str, port: int) -> None:
    server = create_server(state, host, port)
    address = server.server_address
    print(f"serving on http://{address[0]}:{address[1]} (model {state.model_id})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
