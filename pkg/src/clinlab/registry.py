"""Standalone model artifacts: a versioned, hash-stamped JSON envelope that
carries everything needed to predict without the training data, plus a
directory-backed registry and record-level prediction."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .bayesnet import BayesNet, query
from .encoding import Encoder, encode_record
from .errors import ArtifactError, FingerprintMismatch, UnsupportedFormatVersion
from .schema import Schema
from .svm import SvmModel
from .svm import predict as svm_predict

FORMAT_VERSION = "1"
KIND_BAYESNET = "bayesnet"
KIND_SVM = "svm"


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class ModelArtifact:
    """Self-contained trained model: schema stamp, training provenance,
    metrics, and a kind-specific payload."""

    artifact_id: str
    kind: str
    format_version: str
    created_at: str
    schema: Schema
    schema_fingerprint: str
    training_config: dict
    training_metrics: dict
    payload: dict

    def __post_init__(self):
        if self.kind not in (KIND_BAYESNET, KIND_SVM):
            raise ArtifactError(f"unknown artifact kind {self.kind!r}")

    def verify(self) -> None:
        """Refuse to serve a tampered or mismatched schema stamp."""
        actual = self.schema.fingerprint()
        if actual != self.schema_fingerprint:
            raise FingerprintMismatch(
                f"artifact {self.artifact_id}: schema fingerprint {self.schema_fingerprint} "
                f"does not match the embedded schema ({actual})"
            )

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "artifact_id": self.artifact_id,
            "kind": self.kind,
            "created_at": self.created_at,
            "schema": self.schema.to_dict(),
            "schema_fingerprint": self.schema_fingerprint,
            "training_config": self.training_config,
            "training_metrics": self.training_metrics,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelArtifact":
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise UnsupportedFormatVersion(str(version))
        try:
            return cls(
                artifact_id=d["artifact_id"],
                kind=d["kind"],
                format_version=version,
                created_at=d["created_at"],
                schema=Schema.from_dict(d["schema"]),
                schema_fingerprint=d["schema_fingerprint"],
                training_config=d["training_config"],
                training_metrics=d["training_metrics"],
                payload=d["payload"],
            )
        except KeyError as exc:
            raise ArtifactError(f"artifact envelope missing field {exc}") from None

    def summary(self) -> dict:
        """Metadata without the payload, for listings."""
        return {
            "artifact_id": self.artifact_id,
            "kind": self.kind,
            "format_version": self.format_version,
            "created_at": self.created_at,
            "schema_fingerprint": self.schema_fingerprint,
            "training_metrics": self.training_metrics,
        }

    def input_schema(self) -> dict:
        """Field descriptions a client can render as an input form."""
        fields = []
        target = self.payload.get("target")
        for spec in self.schema:
            if spec.name == target:
                continue
            d = spec.to_dict()
            d["required"] = self.kind == KIND_SVM
            fields.append(d)
        return {"fields": fields, "target": target}


def _content_id(kind: str, schema: Schema, payload: dict) -> str:
    digest = hashlib.sha256(
        _canonical({"kind": kind, "schema": schema.to_dict(), "payload": payload}).encode()
    ).hexdigest()
    return f"{kind}-{digest[:12]}"


def export_bayesnet(
    bn: BayesNet,
    target: str,
    schema: Schema,
    training_config: dict | None = None,
    training_metrics: dict | None = None,
) -> ModelArtifact:
    bn.dag.index(target)  # raises MissingVariable for an unknown target
    payload = {"network": bn.to_dict(), "target": target}
    return ModelArtifact(
        artifact_id=_content_id(KIND_BAYESNET, schema, payload),
        kind=KIND_BAYESNET,
        format_version=FORMAT_VERSION,
        created_at=_utc_now(),
        schema=schema,
        schema_fingerprint=schema.fingerprint(),
        training_config=training_config or {},
        training_metrics=training_metrics or {},
        payload=payload,
    )


def export_svm(
    model: SvmModel,
    encoder: Encoder,
    training_config: dict | None = None,
    training_metrics: dict | None = None,
) -> ModelArtifact:
    if model.labels is None:
        raise ArtifactError("svm artifact needs the model's (negative, positive) labels")
    if (
        model.encoder_fingerprint is not None
        and model.encoder_fingerprint != encoder.fingerprint()
    ):
        raise FingerprintMismatch("model was trained against a different encoder")
    payload = {"model": model.to_dict(), "encoder": encoder.to_dict()}
    schema = encoder.schema
    return ModelArtifact(
        artifact_id=_content_id(KIND_SVM, schema, payload),
        kind=KIND_SVM,
        format_version=FORMAT_VERSION,
        created_at=_utc_now(),
        schema=schema,
        schema_fingerprint=schema.fingerprint(),
        training_config=training_config or {},
        training_metrics=training_metrics or {},
        payload=payload,
    )


def save_artifact(artifact: ModelArtifact, path) -> None:
    Path(path).write_text(json.dumps(artifact.to_dict(), indent=2), encoding="utf-8")


def load_artifact(path) -> ModelArtifact:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: not a JSON artifact ({exc})") from None
    if not isinstance(raw, dict):
        raise ArtifactError(f"{path}: artifact envelope must be a JSON object")
    return ModelArtifact.from_dict(raw)


def personalized_predict(artifact: ModelArtifact, record: dict) -> dict:
    """Run one record through an artifact.

    svm artifacts require every encoder variable and return the predicted
    label with its decision value; bayesnet artifacts treat the record as
    evidence and return the posterior distribution of the stamped target.
    """
    artifact.verify()
    if artifact.kind == KIND_SVM:
        model = SvmModel.from_dict(artifact.payload["model"])
        encoder = Encoder.from_dict(artifact.payload["encoder"])
        row = encode_record(encoder, record)  # raises on missing/unknown values
        label, dv = svm_predict(model, row)
        neg, pos = model.labels if model.labels else ("-1", "+1")
        return {
            "kind": KIND_SVM,
            "label": pos if label > 0 else neg,
            "positive": label > 0,
            "decision_value": dv,
        }
    bn = BayesNet.from_dict(artifact.payload["network"])
    target = artifact.payload["target"]
    for name in record:
        bn.dag.index(name)  # raises MissingVariable for names outside the network
        if name == target:
            raise ArtifactError(f"{target!r} is the prediction target, not an input")
    dist = query(bn, {k: str(v) for k, v in record.items()}, target)
    return {"kind": KIND_BAYESNET, "target": target, "distribution": dist}


class Registry:
    """Directory of artifact files, one JSON file per artifact id."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, artifact_id: str) -> Path:
        if not artifact_id or "/" in artifact_id or artifact_id.startswith("."):
            raise ArtifactError(f"invalid artifact id {artifact_id!r}")
        return self.directory / f"{artifact_id}.json"

    def add(self, artifact: ModelArtifact) -> Path:
        path = self._path(artifact.artifact_id)
        save_artifact(artifact, path)
        return path

    def get(self, artifact_id: str) -> ModelArtifact:
        path = self._path(artifact_id)
        if not path.exists():
            raise ArtifactError(f"no artifact {artifact_id!r}")
        return load_artifact(path)

    def list(self) -> tuple[ModelArtifact, ...]:
        return tuple(
            load_artifact(p) for p in sorted(self.directory.glob("*.json"))
        )


def probe_equivalence(
    artifact: ModelArtifact, reloaded: ModelArtifact, probes: list[dict]
) -> float:
    """Largest prediction discrepancy between two artifact instances over
    probe records (0.0 means bit-for-bit identical numerics)."""
    worst = 0.0
    for record in probes:
        a = personalized_predict(artifact, record)
        b = personalized_predict(reloaded, record)
        if artifact.kind == KIND_SVM:
            worst = max(worst, abs(a["decision_value"] - b["decision_value"]))
        else:
            for cat, p in a["distribution"].items():
                worst = max(worst, abs(p - b["distribution"][cat]))
    return worst
