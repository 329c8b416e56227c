"""HTTP facade over the analysis library.

Every number returned over the wire is produced by a library call and
serialized at full precision; the endpoints add routing, id management,
and background execution, never arithmetic.  Long-running analyses
(structure search, grid search) run as jobs: the POST returns a job id
immediately and GET /jobs/{id} reports queued/running/done/failed.
"""

from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .bayesnet import HillClimbConfig, causal_paths, fit_parameters, hill_climb
from .cohort import Criterion, Flowchart, apply_criteria, missingness_comparison
from .dataset import Dataset, clean_sentinels, load_csv_text
from .encoding import encode, fit_encoder
from .errors import ArtifactError, ClinlabError
from .registry import (
    ModelArtifact,
    Registry,
    export_bayesnet,
    export_svm,
    personalized_predict,
)
from .schema import Schema
from .stats import describe
from .svm import (
    DEFAULT_COSTS,
    DEFAULT_GAMMAS,
    SmoConfig,
    grid_search,
    refit_best,
)

JOB_QUEUED = "queued"
JOB_RUNNING = "running"
JOB_DONE = "done"
JOB_FAILED = "failed"


@dataclass
class Job:
    job_id: str
    kind: str
    status: str = JOB_QUEUED
    result: dict | None = None
    error: dict | None = None

    def snapshot(self) -> dict:
        out: dict = {"job_id": self.job_id, "kind": self.kind, "status": self.status}
        if self.status == JOB_DONE:
            out["result"] = self.result
        if self.status == JOB_FAILED:
            out["error"] = self.error
        return out


@dataclass
class _Cohort:
    dataset: Dataset
    flowchart: Flowchart
    missingness: dict


class SessionStore:
    """Session state: in-memory datasets/cohorts/jobs plus the on-disk
    artifact registry (artifacts survive restarts, the rest does not)."""

    def __init__(self, artifact_dir, workers: int = 2):
        self.datasets: dict[str, Dataset] = {}
        self.cohorts: dict[str, _Cohort] = {}
        self.registry = Registry(artifact_dir)
        self.jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._counters = {"ds": itertools.count(1), "co": itertools.count(1), "job": itertools.count(1)}
        self._pool = ThreadPoolExecutor(max_workers=max(1, workers))

    def _next_id(self, prefix: str) -> str:
        return f"{prefix}-{next(self._counters[prefix]):04d}"

    def add_dataset(self, ds: Dataset) -> str:
        with self._lock:
            ds_id = self._next_id("ds")
            self.datasets[ds_id] = ds
        return ds_id

    def add_cohort(self, cohort: _Cohort) -> str:
        with self._lock:
            co_id = self._next_id("co")
            self.cohorts[co_id] = cohort
        return co_id

    def submit(self, kind: str, work) -> str:
        """Queue `work` (a nullary callable returning the result dict)."""
        with self._lock:
            job_id = self._next_id("job")
            job = Job(job_id, kind)
            self.jobs[job_id] = job

        def run():
            with self._lock:
                job.status = JOB_RUNNING
            try:
                result = work()
            except ClinlabError as exc:
                with self._lock:
                    job.error = {"error": type(exc).__name__, "message": str(exc)}
                    job.status = JOB_FAILED
            except Exception as exc:  # surface unexpected failures too
                with self._lock:
                    job.error = {"error": type(exc).__name__, "message": str(exc)}
                    job.status = JOB_FAILED
            else:
                with self._lock:
                    job.result = result
                    job.status = JOB_DONE

        self._pool.submit(run)
        return job_id

    def job_snapshot(self, job_id: str) -> dict | None:
        with self._lock:
            job = self.jobs.get(job_id)
            return job.snapshot() if job else None

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)


def _error_detail(exc: ClinlabError) -> dict:
    detail = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("column", "variable", "row", "value"):
        v = getattr(exc, attr, None)
        if v is not None:
            detail[attr] = v
    return detail


def _require(body: dict, *names: str):
    missing = [n for n in names if n not in body]
    if missing:
        from fastapi import HTTPException

        raise HTTPException(
            status_code=422,
            detail={"error": "MissingField", "message": f"body is missing {missing}"},
        )
    return [body[n] for n in names]


def create_app(store: SessionStore):
    from fastapi import Body, FastAPI, HTTPException
    from fastapi.responses import JSONResponse

    app = FastAPI(title="clinlab", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(ClinlabError)
    async def clinlab_error_handler(request, exc: ClinlabError):
        return JSONResponse(status_code=422, content={"detail": _error_detail(exc)})

    def _dataset_for(body: dict) -> Dataset:
        if "cohort_id" in body:
            cohort = store.cohorts.get(body["cohort_id"])
            if cohort is None:
                raise HTTPException(404, detail=f"no cohort {body['cohort_id']!r}")
            return cohort.dataset
        if "dataset_id" in body:
            ds = store.datasets.get(body["dataset_id"])
            if ds is None:
                raise HTTPException(404, detail=f"no dataset {body['dataset_id']!r}")
            return ds
        raise HTTPException(
            422,
            detail={"error": "MissingField", "message": "need dataset_id or cohort_id"},
        )

    @app.post("/datasets", status_code=201)
    def post_dataset(body: dict = Body(...)):
        csv_text, schema_dict = _require(body, "csv", "schema")
        schema = Schema.from_dict(schema_dict)
        ds = load_csv_text(csv_text, schema, source=body.get("source", "upload"))
        report = None
        if body.get("clean_sentinels", True):
            ds, clean = clean_sentinels(ds)
            report = clean.to_dict()
        ds_id = store.add_dataset(ds)
        return {
            "dataset_id": ds_id,
            "n_rows": ds.n_rows,
            "variables": list(ds.schema.names),
            "clean_report": report,
        }

    @app.get("/datasets/{ds_id}/summary")
    def dataset_summary(ds_id: str):
        ds = store.datasets.get(ds_id)
        if ds is None:
            raise HTTPException(404, detail=f"no dataset {ds_id!r}")
        columns = {}
        for name in ds.schema.names:
            try:
                columns[name] = describe(ds, name).to_dict()
            except ClinlabError as exc:
                columns[name] = {"kind": "unavailable", "error": str(exc)}
        return {"dataset_id": ds_id, "n_rows": ds.n_rows, "columns": columns}

    @app.post("/cohorts", status_code=201)
    def post_cohort(body: dict = Body(...)):
        ds = _dataset_for(body)
        (criteria_dicts, analysis_vars) = _require(body, "criteria", "analysis_vars")
        criteria = [Criterion.from_dict(d) for d in criteria_dicts]
        cohort_ds, flow = apply_criteria(ds, criteria, analysis_vars)
        report = missingness_comparison(ds, analysis_vars)
        cohort = _Cohort(cohort_ds, flow, report.to_dict())
        co_id = store.add_cohort(cohort)
        return {
            "cohort_id": co_id,
            "n_rows": cohort_ds.n_rows,
            "flowchart": flow.to_dict(),
            "missingness": cohort.missingness,
        }

    @app.get("/cohorts/{co_id}/flowchart")
    def cohort_flowchart(co_id: str):
        cohort = store.cohorts.get(co_id)
        if cohort is None:
            raise HTTPException(404, detail=f"no cohort {co_id!r}")
        return {"cohort_id": co_id, "flowchart": cohort.flowchart.to_dict()}

    @app.post("/analyses/bayesnet", status_code=202)
    def post_bayesnet(body: dict = Body(...)):
        ds = _dataset_for(body)
        (variables,) = _require(body, "variables")
        config = HillClimbConfig.from_dict(body.get("config", {}))
        alpha = float(body.get("alpha", 1.0))
        target = body.get("target")
        sub = ds.select(list(variables))

        def work() -> dict:
            scored = hill_climb(sub, config)
            result: dict = {
                "nodes": list(scored.dag.nodes),
                "edges": [[s, t] for s, t in scored.dag.edge_names()],
                "score": scored.total,
                "family_scores": list(scored.family_scores),
                "config": config.to_dict(),
            }
            bn = fit_parameters(scored.dag, sub, alpha=alpha)
            if target is not None:
                paths = causal_paths(scored.dag, target)
                result["causal"] = paths.to_dict()
                artifact = export_bayesnet(
                    bn,
                    target,
                    sub.schema,
                    training_config={"hill_climb": config.to_dict(), "alpha": alpha},
                    training_metrics={"score": scored.total},
                )
                store.registry.add(artifact)
                result["artifact_id"] = artifact.artifact_id
            return result

        return {"job_id": store.submit("bayesnet", work)}

    @app.post("/analyses/svm-grid", status_code=202)
    def post_svm_grid(body: dict = Body(...)):
        ds = _dataset_for(body)
        (feature_vars, label_var) = _require(body, "feature_vars", "label_var")
        gammas = tuple(float(g) for g in body.get("gammas", DEFAULT_GAMMAS))
        costs = tuple(float(c) for c in body.get("costs", DEFAULT_COSTS))
        k = int(body.get("folds", 10))
        seed = int(body.get("seed", 0))
        weights = body.get("class_weights")
        config = SmoConfig(
            seed=seed,
            class_weights=tuple(float(w) for w in weights) if weights else None,
        )
        spec = ds.schema.column(label_var)
        if not spec.is_categorical or len(spec.categories) != 2:
            raise HTTPException(
                422,
                detail={
                    "error": "LabelError",
                    "message": f"label {label_var!r} must be categorical with 2 categories",
                },
            )
        positive = body.get("positive_label", spec.categories[1])
        if positive not in spec.categories:
            raise HTTPException(
                422,
                detail={
                    "error": "LabelError",
                    "message": f"positive label {positive!r} not a category of {label_var!r}",
                },
            )
        negative = next(c for c in spec.categories if c != positive)

        def work() -> dict:
            import numpy as np

            enc = fit_encoder(ds, feature_vars)
            x = encode(enc, ds)
            codes = ds.column(label_var).values.astype(np.int64)
            y = np.where(codes == spec.categories.index(positive), 1, -1).astype(np.int64)
            result = grid_search(x, y, gammas, costs, k=k, seed=seed, config=config)
            model = refit_best(
                x,
                y,
                result,
                config=config,
                labels=(negative, positive),
                encoder_fingerprint=enc.fingerprint(),
            )
            best = result.best
            artifact = export_svm(
                model,
                enc,
                training_config={
                    "gammas": list(gammas),
                    "costs": list(costs),
                    "folds": k,
                    "seed": seed,
                    "label_var": label_var,
                    "positive_label": positive,
                },
                training_metrics=best.to_dict(),
            )
            store.registry.add(artifact)
            return {
                "grid": result.to_dict(),
                "best": best.to_dict(),
                "artifact_id": artifact.artifact_id,
            }

        return {"job_id": store.submit("svm-grid", work)}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        snap = store.job_snapshot(job_id)
        if snap is None:
            raise HTTPException(404, detail=f"no job {job_id!r}")
        return snap

    @app.get("/models")
    def list_models():
        return {"models": [a.summary() for a in store.registry.list()]}

    @app.get("/models/{artifact_id}")
    def get_model(artifact_id: str):
        try:
            artifact = store.registry.get(artifact_id)
        except ArtifactError:
            raise HTTPException(404, detail=f"no artifact {artifact_id!r}") from None
        out = artifact.summary()
        out["input_schema"] = artifact.input_schema()
        return out

    @app.post("/models/{artifact_id}/predict")
    def post_predict(artifact_id: str, body: dict = Body(...)):
        try:
            artifact = store.registry.get(artifact_id)
        except ArtifactError:
            raise HTTPException(404, detail=f"no artifact {artifact_id!r}") from None
        (record,) = _require(body, "record")
        return {"artifact_id": artifact_id, "prediction": personalized_predict(artifact, record)}

    return app


@dataclass
class ServeConfig:
    port: int = 8323
    host: str = "127.0.0.1"
    artifact_dir: str = "artifacts"
    workers: int = 2


def serve(config: ServeConfig) -> None:
    """Run the service until interrupted (blocking)."""
    import uvicorn

    store = SessionStore(config.artifact_dir, workers=config.workers)
    app = create_app(store)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
