"""Model artifacts: envelope integrity, storage, and record prediction."""

import dataclasses

import numpy as np
import pytest

from clinlab.bayesnet import BayesNet, dag_from_edges, fit_parameters
from clinlab.cohort import apply_criteria
from clinlab.dataset import ColumnData, Dataset
from clinlab.encoding import encode, fit_encoder
from clinlab.errors import (
    ArtifactError,
    FingerprintMismatch,
    MissingVariable,
    UnknownCategory,
    UnsupportedFormatVersion,
)
from clinlab.registry import (
    FORMAT_VERSION,
    ModelArtifact,
    Registry,
    export_bayesnet,
    export_svm,
    load_artifact,
    personalized_predict,
    probe_equivalence,
    save_artifact,
)
from clinlab.schema import ColumnSpec, Schema
from clinlab.svm import SmoConfig, train_smo
from clinlab.synth import ANALYSIS_VARIABLES, default_config, default_criteria, generate


def chain_dataset():
    """Two-column categorical dataset: exposure delay band and outcome band."""
    ds = generate(default_config(n_total=1200, seed=11))
    kept, _ = apply_criteria(ds, list(default_criteria()), list(ANALYSIS_VARIABLES))
    return kept.select(["time_to_evaluation", "tiw"])


def chain_artifact():
    ds = chain_dataset()
    dag = dag_from_edges(
        ("time_to_evaluation", "tiw"), [("time_to_evaluation", "tiw")]
    )
    bn = fit_parameters(dag, ds, alpha=1.0)
    return export_bayesnet(bn, "tiw", ds.schema), bn, ds


def svm_toy():
    schema = Schema(
        (
            ColumnSpec("gender", "categorical", categories=("man", "woman")),
            ColumnSpec("x", "continuous"),
        )
    )
    ds = Dataset.from_columns(
        schema,
        {
            "gender": ["man", "woman", "man", "woman"],
            "x": [-1.0, -0.8, 1.0, 1.2],
        },
    )
    enc = fit_encoder(ds, ["gender", "x"])
    features = encode(enc, ds)
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    model = train_smo(
        features, y, cost=10.0, gamma=0.5, config=SmoConfig(seed=3),
        labels=("low", "high"), encoder_fingerprint=enc.fingerprint(),
    )
    return export_svm(model, enc), model, enc


class TestEnvelope:
    def test_unknown_kind_rejected(self):
        artifact, _, _ = chain_artifact()
        with pytest.raises(ArtifactError):
            ModelArtifact(
                artifact_id="x-1", kind="forest", format_version=FORMAT_VERSION,
                created_at=artifact.created_at, schema=artifact.schema,
                schema_fingerprint=artifact.schema_fingerprint,
                training_config={}, training_metrics={}, payload={},
            )

    def test_content_addressed_id(self):
        artifact, _, _ = chain_artifact()
        assert artifact.artifact_id.startswith("bayesnet-")
        assert len(artifact.artifact_id) == len("bayesnet-") + 12

    def test_same_payload_same_id(self):
        a, _, _ = chain_artifact()
        b, _, _ = chain_artifact()
        assert a.artifact_id == b.artifact_id

    def test_round_trip_preserves_network_exactly(self, tmp_path):
        artifact, bn, _ = chain_artifact()
        path = tmp_path / "model.json"
        save_artifact(artifact, path)
        reloaded = load_artifact(path)
        assert reloaded.to_dict() == artifact.to_dict()
        again = BayesNet.from_dict(reloaded.payload["network"])
        for mine, theirs in zip(bn.cpts, again.cpts):
            assert np.array_equal(mine, theirs)

    def test_tampered_schema_fingerprint_detected(self, tmp_path):
        artifact, _, _ = chain_artifact()
        d = artifact.to_dict()
        d["schema_fingerprint"] = "0" * 64
        broken = ModelArtifact.from_dict(d)
        with pytest.raises(FingerprintMismatch):
            broken.verify()
        with pytest.raises(FingerprintMismatch):
            personalized_predict(broken, {"time_to_evaluation": ">=72h"})

    def test_unsupported_format_version(self):
        artifact, _, _ = chain_artifact()
        d = artifact.to_dict()
        d["format_version"] = "2"
        with pytest.raises(UnsupportedFormatVersion):
            ModelArtifact.from_dict(d)

    def test_missing_envelope_field(self):
        artifact, _, _ = chain_artifact()
        d = artifact.to_dict()
        del d["payload"]
        with pytest.raises(ArtifactError):
            ModelArtifact.from_dict(d)

    def test_not_json(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text("not json at all")
        with pytest.raises(ArtifactError):
            load_artifact(path)

    def test_json_array_rejected(self, tmp_path):
        path = tmp_path / "arr.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ArtifactError):
            load_artifact(path)

    def test_summary_has_no_payload(self):
        artifact, _, _ = chain_artifact()
        s = artifact.summary()
        assert "payload" not in s
        assert s["artifact_id"] == artifact.artifact_id
        assert s["kind"] == "bayesnet"


class TestBayesnetPrediction:
    def test_posterior_matches_fitted_table_row(self):
        artifact, bn, ds = chain_artifact()
        out = personalized_predict(artifact, {"time_to_evaluation": ">=72h"})
        assert out["kind"] == "bayesnet"
        assert out["target"] == "tiw"
        time_cats = ds.schema.column("time_to_evaluation").categories
        tiw_cats = ds.schema.column("tiw").categories
        row = bn.cpts[bn.dag.index("tiw")][time_cats.index(">=72h")]
        for j, cat in enumerate(tiw_cats):
            assert out["distribution"][cat] == pytest.approx(row[j], abs=1e-12)

    def test_posterior_sums_to_one(self):
        artifact, _, _ = chain_artifact()
        out = personalized_predict(artifact, {"time_to_evaluation": "0-11h"})
        assert sum(out["distribution"].values()) == pytest.approx(1.0, abs=1e-9)

    def test_no_evidence_gives_marginal(self):
        artifact, _, ds = chain_artifact()
        out = personalized_predict(artifact, {})
        n = ds.n_rows
        short = int((ds.column("tiw").values == 0).sum())
        assert out["distribution"]["0-8"] == pytest.approx(short / n, abs=0.01)

    def test_target_not_accepted_as_input(self):
        artifact, _, _ = chain_artifact()
        with pytest.raises(ArtifactError):
            personalized_predict(artifact, {"tiw": "0-8"})

    def test_unknown_variable_rejected(self):
        artifact, _, _ = chain_artifact()
        with pytest.raises(MissingVariable):
            personalized_predict(artifact, {"nope": "1"})

    def test_input_schema_excludes_target_fields_optional(self):
        artifact, _, _ = chain_artifact()
        form = artifact.input_schema()
        assert form["target"] == "tiw"
        names = [f["name"] for f in form["fields"]]
        assert names == ["time_to_evaluation"]
        assert all(f["required"] is False for f in form["fields"])


class TestSvmPrediction:
    def test_positive_side_labeled(self):
        artifact, _, _ = svm_toy()
        out = personalized_predict(artifact, {"gender": "man", "x": "1.0"})
        assert out["kind"] == "svm"
        assert out["label"] == "high"
        assert out["positive"] is True
        assert out["decision_value"] > 0

    def test_negative_side_labeled(self):
        artifact, _, _ = svm_toy()
        out = personalized_predict(artifact, {"gender": "woman", "x": -1.0})
        assert out["label"] == "low"
        assert out["positive"] is False
        assert out["decision_value"] < 0

    def test_missing_field_names_the_field(self):
        artifact, _, _ = svm_toy()
        with pytest.raises(MissingVariable) as err:
            personalized_predict(artifact, {"x": "1.0"})
        assert err.value.variable == "gender"

    def test_none_value_treated_as_missing(self):
        artifact, _, _ = svm_toy()
        with pytest.raises(MissingVariable):
            personalized_predict(artifact, {"gender": None, "x": "1.0"})

    def test_unknown_category_rejected(self):
        artifact, _, _ = svm_toy()
        with pytest.raises(UnknownCategory):
            personalized_predict(artifact, {"gender": "other", "x": "0.0"})

    def test_unparseable_number_rejected(self):
        artifact, _, _ = svm_toy()
        with pytest.raises(UnknownCategory):
            personalized_predict(artifact, {"gender": "man", "x": "tall"})

    def test_export_requires_display_labels(self):
        _, model, enc = svm_toy()
        stripped = dataclasses.replace(model, labels=None)
        with pytest.raises(ArtifactError):
            export_svm(stripped, enc)

    def test_export_rejects_foreign_encoder(self):
        _, model, _ = svm_toy()
        other_ds = Dataset.from_columns(
            Schema((ColumnSpec("gender", "categorical", categories=("man", "woman")),
                    ColumnSpec("x", "continuous"))),
            {"gender": ["man", "woman", "woman"], "x": [5.0, 7.0, 9.0]},
        )
        with pytest.raises(FingerprintMismatch):
            export_svm(model, fit_encoder(other_ds, ["gender", "x"]))

    def test_input_schema_all_required_no_target(self):
        artifact, _, _ = svm_toy()
        form = artifact.input_schema()
        assert form["target"] is None
        assert [f["name"] for f in form["fields"]] == ["gender", "x"]
        assert all(f["required"] is True for f in form["fields"])


class TestRegistry:
    def test_add_get_round_trip(self, tmp_path):
        artifact, _, _ = svm_toy()
        reg = Registry(tmp_path / "models")
        path = reg.add(artifact)
        assert path.exists()
        assert reg.get(artifact.artifact_id).to_dict() == artifact.to_dict()

    def test_list_sorted_by_id(self, tmp_path):
        reg = Registry(tmp_path)
        svm_art, _, _ = svm_toy()
        bn_art, _, _ = chain_artifact()
        reg.add(svm_art)
        reg.add(bn_art)
        ids = [a.artifact_id for a in reg.list()]
        assert ids == sorted(ids)
        assert set(ids) == {svm_art.artifact_id, bn_art.artifact_id}

    def test_unknown_id(self, tmp_path):
        with pytest.raises(ArtifactError):
            Registry(tmp_path).get("svm-000000000000")

    @pytest.mark.parametrize("bad", ["", "../escape", "a/b", ".hidden"])
    def test_malformed_ids_rejected(self, tmp_path, bad):
        with pytest.raises(ArtifactError):
            Registry(tmp_path).get(bad)

    def test_probe_equivalence_zero_after_reload(self, tmp_path):
        svm_art, _, _ = svm_toy()
        bn_art, _, _ = chain_artifact()
        reg = Registry(tmp_path)
        reg.add(svm_art)
        reg.add(bn_art)
        svm_probes = [
            {"gender": "man", "x": "0.3"},
            {"gender": "woman", "x": "-2.5"},
        ]
        bn_probes = [{"time_to_evaluation": "12-47h"}, {}]
        assert probe_equivalence(
            svm_art, reg.get(svm_art.artifact_id), svm_probes
        ) == 0.0
        assert probe_equivalence(
            bn_art, reg.get(bn_art.artifact_id), bn_probes
        ) == 0.0
