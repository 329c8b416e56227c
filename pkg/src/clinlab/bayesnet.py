"""Discrete Bayesian networks over categorical columns: BIC-scored
hill-climbing structure search, exhaustive-enumeration oracle for small
graphs, Laplace-smoothed parameter fitting, exact conditional queries by
variable elimination, and direct/indirect cause extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, require_clean
from .errors import (
    ContinuousVariable,
    CycleError,
    IncompleteData,
    MissingVariable,
    SearchConfigError,
    TooManyVariables,
    UnknownCategory,
    ZeroProbabilityEvidence,
)

_IMPROVE_EPS = 1e-9  # a move must beat this to be an improvement
_TIE_EPS = 1e-6  # deltas closer than this are ties; enumeration order decides


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named nodes; parents stored as sorted
    index tuples per node."""

    nodes: tuple[str, ...]
    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "parents", tuple(tuple(sorted(p)) for p in self.parents)
        )
        n = len(self.nodes)
        if len(set(self.nodes)) != n:
            raise ValueError("duplicate node names")
        if len(self.parents) != n:
            raise ValueError("parents list length must match node count")
        for i, ps in enumerate(self.parents):
            for p in ps:
                if not 0 <= p < n:
                    raise ValueError(f"parent index {p} out of range")
                if p == i:
                    raise CycleError(f"self-loop on {self.nodes[i]!r}")
            if len(set(ps)) != len(ps):
                raise ValueError(f"duplicate parents for {self.nodes[i]!r}")
        self.topological_order()  # raises CycleError on a cycle

    @property
    def n(self) -> int:
        return len(self.nodes)

    def index(self, name: str) -> int:
        try:
            return self.nodes.index(name)
        except ValueError:
            raise MissingVariable(name) from None

    def edges(self) -> tuple[tuple[int, int], ...]:
        """All (parent, child) index pairs, sorted."""
        return tuple(
            sorted((p, i) for i, ps in enumerate(self.parents) for p in ps)
        )

    def edge_names(self) -> tuple[tuple[str, str], ...]:
        return tuple((self.nodes[p], self.nodes[c]) for p, c in self.edges())

    def children(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for i, ps in enumerate(self.parents):
            for p in ps:
                out[p].append(i)
        return tuple(tuple(c) for c in out)

    def topological_order(self) -> tuple[int, ...]:
        indeg = [len(ps) for ps in self.parents]
        children = [[] for _ in self.nodes]
        for i, ps in enumerate(self.parents):
            for p in ps:
                children[p].append(i)
        ready = [i for i, d in enumerate(indeg) if d == 0]
        order: list[int] = []
        while ready:
            ready.sort()
            i = ready.pop(0)
            order.append(i)
            for c in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != self.n:
            raise CycleError("directed cycle detected")
        return tuple(order)

    def has_path(self, src: int, dst: int) -> bool:
        """True when a directed path src → … → dst exists."""
        children = self.children()
        stack, seen = [src], {src}
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            for c in children[u]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def ancestors(self, target: int) -> frozenset[int]:
        out: set[int] = set()
        stack = list(self.parents[target])
        while stack:
            u = stack.pop()
            if u not in out:
                out.add(u)
                stack.extend(self.parents[u])
        return frozenset(out)

    def with_edge(self, src: int, dst: int) -> "Dag":
        ps = list(self.parents)
        ps[dst] = tuple(sorted(ps[dst] + (src,)))
        return Dag(self.nodes, tuple(ps))

    def without_edge(self, src: int, dst: int) -> "Dag":
        ps = list(self.parents)
        ps[dst] = tuple(p for p in ps[dst] if p != src)
        return Dag(self.nodes, tuple(ps))

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [[s, t] for s, t in self.edge_names()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dag":
        return dag_from_edges(d["nodes"], [(s, t) for s, t in d["edges"]])


def dag_from_edges(nodes, edges) -> Dag:
    nodes = tuple(nodes)
    index = {name: i for i, name in enumerate(nodes)}
    parents: list[list[int]] = [[] for _ in nodes]
    for src, dst in edges:
        if src not in index:
            raise MissingVariable(src)
        if dst not in index:
            raise MissingVariable(dst)
        parents[index[dst]].append(index[src])
    return Dag(nodes, tuple(tuple(p) for p in parents))


def empty_dag(nodes) -> Dag:
    nodes = tuple(nodes)
    return Dag(nodes, tuple(() for _ in nodes))


def edge_list_text(dag: Dag) -> str:
    """One `src -> dst` line per edge, in sorted edge order."""
    return "\n".join(f"{s} -> {t}" for s, t in dag.edge_names())


def to_dot(dag: Dag) -> str:
    """Graph description in DOT syntax for standard renderers."""
    lines = ["digraph g {"]
    for name in dag.nodes:
        lines.append(f'  "{name}";')
    for s, t in dag.edge_names():
        lines.append(f'  "{s}" -> "{t}";')
    lines.append("}")
    return "\n".join(lines)


@dataclass(frozen=True)
class ScoredDag:
    dag: Dag
    total: float
    family_scores: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "family_scores", tuple(self.family_scores))
        if abs(self.total - math.fsum(self.family_scores)) > 1e-9:
            raise ValueError("total must equal the sum of family scores")


class _Scorer:
    """Caches per-(node, parent-set) BIC family scores for one dataset."""

    def __init__(self, ds: Dataset, nodes: tuple[str, ...]):
        require_clean(ds)
        codes = np.empty((ds.n_rows, len(nodes)), dtype=np.int64)
        arities: list[int] = []
        for j, name in enumerate(nodes):
            spec = ds.schema.column(name)
            if not spec.is_categorical:
                raise ContinuousVariable(
                    f"{name!r} is continuous; bin it before structure search"
                )
            col = ds.column(name)
            if col.missing.any():
                raise IncompleteData(f"{name!r} has missing values")
            codes[:, j] = col.values
            arities.append(len(spec.categories))
        if ds.n_rows < 1:
            raise IncompleteData("dataset is empty")
        self.codes = codes
        self.arities = tuple(arities)
        self.n_rows = ds.n_rows
        self.ln_n = math.log(ds.n_rows)
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def family(self, node: int, parents: tuple[int, ...]) -> float:
        key = (node, parents)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        r = self.arities[node]
        q = 1
        idx = np.zeros(self.n_rows, dtype=np.int64)
        for p in parents:
            idx = idx * self.arities[p] + self.codes[:, p]
            q *= self.arities[p]
        counts = (
            np.bincount(idx * r + self.codes[:, node], minlength=q * r)
            .reshape(q, r)
            .astype(np.float64)
        )
        n_ij = counts.sum(axis=1, keepdims=True)
        mask = counts > 0
        ll = float(
            (counts[mask] * np.log(counts[mask] / np.broadcast_to(n_ij, counts.shape)[mask])).sum()
        )
        score = ll - 0.5 * self.ln_n * q * (r - 1)
        self._cache[key] = score
        return score

    def score(self, dag: Dag) -> ScoredDag:
        fams = tuple(self.family(i, dag.parents[i]) for i in range(dag.n))
        return ScoredDag(dag, math.fsum(fams), fams)


def bic_score(dag: Dag, ds: Dataset) -> ScoredDag:
    """BIC of a DAG: Σ_i [Σ_jk N_ijk·ln(N_ijk/N_ij) − (ln N / 2)·q_i·(r_i−1)].

    q_i is the product of the full (schema-declared) parent arities; cells
    with zero count contribute nothing to the log-likelihood term.
    """
    return _Scorer(ds, dag.nodes).score(dag)


@dataclass(frozen=True)
class HillClimbConfig:
    max_parents: int = 5
    restarts: int = 5
    seed: int = 0
    forbidden: tuple[tuple[str, str], ...] = ()
    required: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "forbidden", tuple((s, t) for s, t in self.forbidden))
        object.__setattr__(self, "required", tuple((s, t) for s, t in self.required))
        if self.max_parents < 0:
            raise SearchConfigError("max_parents must be non-negative")
        if self.restarts < 0:
            raise SearchConfigError("restarts must be non-negative")
        clash = set(self.forbidden) & set(self.required)
        if clash:
            raise SearchConfigError(f"edges both forbidden and required: {sorted(clash)}")

    def to_dict(self) -> dict:
        return {
            "max_parents": self.max_parents,
            "restarts": self.restarts,
            "seed": self.seed,
            "forbidden": [list(e) for e in self.forbidden],
            "required": [list(e) for e in self.required],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HillClimbConfig":
        return cls(
            max_parents=int(d.get("max_parents", 5)),
            restarts=int(d.get("restarts", 5)),
            seed=int(d.get("seed", 0)),
            forbidden=tuple((s, t) for s, t in d.get("forbidden", [])),
            required=tuple((s, t) for s, t in d.get("required", [])),
        )


def _greedy_climb(
    scorer: _Scorer,
    dag: Dag,
    max_parents: int,
    forbidden: frozenset[tuple[int, int]],
    required: frozenset[tuple[int, int]],
) -> Dag:
    """Steepest-ascent single-edge moves until no move improves the score.

    Candidate moves are enumerated deletions first, then additions, then
    reversals, each in sorted (source, target) order; a later candidate
    displaces the incumbent only when it is better by more than the tie
    tolerance, so equal-scoring moves resolve to the earliest enumerated.
    """
    n = dag.n
    while True:
        best_delta = -math.inf
        best: tuple[str, int, int] | None = None

        for src, dst in dag.edges():
            if (src, dst) in required:
                continue
            before = scorer.family(dst, dag.parents[dst])
            after = scorer.family(dst, tuple(p for p in dag.parents[dst] if p != src))
            delta = after - before
            if delta > best_delta + _TIE_EPS:
                best_delta, best = delta, ("del", src, dst)

        for src in range(n):
            for dst in range(n):
                if src == dst or src in dag.parents[dst]:
                    continue
                if dst in dag.parents[src]:  # reverse edge present
                    continue
                if (src, dst) in forbidden:
                    continue
                if len(dag.parents[dst]) >= max_parents:
                    continue
                if dag.has_path(dst, src):  # would close a cycle
                    continue
                before = scorer.family(dst, dag.parents[dst])
                after = scorer.family(dst, tuple(sorted(dag.parents[dst] + (src,))))
                delta = after - before
                if delta > best_delta + _TIE_EPS:
                    best_delta, best = delta, ("add", src, dst)

        for src, dst in dag.edges():
            if (src, dst) in required or (dst, src) in forbidden:
                continue
            if len(dag.parents[src]) >= max_parents:
                continue
            stripped = dag.without_edge(src, dst)
            if stripped.has_path(src, dst):  # another path would close a cycle
                continue
            delta = (
                scorer.family(dst, stripped.parents[dst])
                + scorer.family(src, tuple(sorted(dag.parents[src] + (dst,))))
                - scorer.family(dst, dag.parents[dst])
                - scorer.family(src, dag.parents[src])
            )
            if delta > best_delta + _TIE_EPS:
                best_delta, best = delta, ("rev", src, dst)

        if best is None or best_delta <= _IMPROVE_EPS:
            return dag
        kind, src, dst = best
        if kind == "del":
            dag = dag.without_edge(src, dst)
        elif kind == "add":
            dag = dag.with_edge(src, dst)
        else:
            dag = dag.without_edge(src, dst).with_edge(dst, src)


def _random_start(
    nodes: tuple[str, ...],
    rng: np.random.Generator,
    max_parents: int,
    forbidden: frozenset[tuple[int, int]],
    required_dag: Dag,
) -> Dag:
    """Random legal DAG: required edges plus coin-flip additions in shuffled
    pair order, rejecting anything that breaks acyclicity or the parent cap."""
    dag = required_dag
    n = len(nodes)
    pairs = [(s, d) for s in range(n) for d in range(n) if s != d]
    order = rng.permutation(len(pairs))
    for pi in order:
        src, dst = pairs[pi]
        if rng.random() >= 0.3:
            continue
        if src in dag.parents[dst] or dst in dag.parents[src]:
            continue
        if (src, dst) in forbidden or len(dag.parents[dst]) >= max_parents:
            continue
        if dag.has_path(dst, src):
            continue
        dag = dag.with_edge(src, dst)
    return dag


def hill_climb(ds: Dataset, config: HillClimbConfig = HillClimbConfig()) -> ScoredDag:
    """Greedy BIC search with seeded random restarts; returns the best local
    optimum found across the cold start and every restart."""
    nodes = tuple(ds.schema.names)
    if len(nodes) < 2:
        raise SearchConfigError("structure search needs at least 2 variables")
    scorer = _Scorer(ds, nodes)
    index = {name: i for i, name in enumerate(nodes)}
    for s, t in config.forbidden + config.required:
        if s not in index or t not in index:
            raise SearchConfigError(f"constraint edge ({s!r}, {t!r}) names unknown variables")
    forbidden = frozenset((index[s], index[t]) for s, t in config.forbidden)
    required = frozenset((index[s], index[t]) for s, t in config.required)
    required_indegree: dict[int, int] = {}
    for _, dst in required:
        required_indegree[dst] = required_indegree.get(dst, 0) + 1
    if any(v > config.max_parents for v in required_indegree.values()):
        raise SearchConfigError("required edges exceed max_parents")
    try:
        required_dag = dag_from_edges(nodes, [(nodes[s], nodes[t]) for s, t in sorted(required)])
    except CycleError:
        raise SearchConfigError("required edges form a cycle") from None

    best = scorer.score(
        _greedy_climb(scorer, required_dag, config.max_parents, forbidden, required)
    )
    for restart in range(config.restarts):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, restart]))
        start = _random_start(nodes, rng, config.max_parents, forbidden, required_dag)
        result = scorer.score(
            _greedy_climb(scorer, start, config.max_parents, forbidden, required)
        )
        if result.total > best.total:
            best = result
    return best


def enumerate_best_dag(ds: Dataset) -> ScoredDag:
    """Exhaustive maximum-BIC DAG for up to 4 variables (25 DAGs on 3 nodes,
    543 on 4); ties go to fewer edges, then the lexicographically smallest
    edge list."""
    nodes = tuple(ds.schema.names)
    n = len(nodes)
    if n > 4:
        raise TooManyVariables("exhaustive enumeration is limited to 4 variables")
    if n < 1:
        raise SearchConfigError("need at least one variable")
    scorer = _Scorer(ds, nodes)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    best: ScoredDag | None = None
    best_key: tuple[int, tuple[tuple[int, int], ...]] | None = None
    for combo in range(3 ** len(pairs)):
        edges: list[tuple[int, int]] = []
        c = combo
        for i, j in pairs:
            state = c % 3
            c //= 3
            if state == 1:
                edges.append((i, j))
            elif state == 2:
                edges.append((j, i))
        try:
            dag = dag_from_edges(nodes, [(nodes[s], nodes[t]) for s, t in edges])
        except CycleError:
            continue
        scored = scorer.score(dag)
        key = (len(edges), tuple(sorted(edges)))
        if (
            best is None
            or scored.total > best.total + 1e-9
            or (abs(scored.total - best.total) <= 1e-9 and key < best_key)
        ):
            best, best_key = scored, key
    assert best is not None
    return best


@dataclass(frozen=True)
class BayesNet:
    """DAG plus one conditional-probability table per node.

    cpts[i] has shape (q_i, r_i): one row per parent configuration in
    row-major parent-code order, one column per category of node i.
    """

    dag: Dag
    cpts: tuple[np.ndarray, ...]
    categories: tuple[tuple[str, ...], ...]
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "cpts", tuple(np.asarray(t, dtype=np.float64) for t in self.cpts))
        object.__setattr__(
            self, "categories", tuple(tuple(c) for c in self.categories)
        )
        if len(self.cpts) != self.dag.n or len(self.categories) != self.dag.n:
            raise ValueError("need one CPT and one category list per node")
        for i, table in enumerate(self.cpts):
            table.setflags(write=False)
            r = len(self.categories[i])
            q = 1
            for p in self.dag.parents[i]:
                q *= len(self.categories[p])
            if table.shape != (q, r):
                raise ValueError(
                    f"CPT for {self.dag.nodes[i]!r} must be {(q, r)}, got {table.shape}"
                )
            if np.abs(table.sum(axis=1) - 1.0).max() > 1e-9:
                raise ValueError(f"CPT rows for {self.dag.nodes[i]!r} must sum to 1")

    def arity(self, i: int) -> int:
        return len(self.categories[i])

    def to_dict(self) -> dict:
        return {
            "dag": self.dag.to_dict(),
            "categories": [list(c) for c in self.categories],
            "cpts": [[[float(v) for v in row] for row in t] for t in self.cpts],
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BayesNet":
        return cls(
            dag=Dag.from_dict(d["dag"]),
            cpts=tuple(np.asarray(t, dtype=np.float64) for t in d["cpts"]),
            categories=tuple(tuple(c) for c in d["categories"]),
            alpha=float(d["alpha"]),
        )


def fit_parameters(dag: Dag, ds: Dataset, alpha: float = 1.0) -> BayesNet:
    """CPT entry = (N_ijk + alpha) / (N_ij + alpha·r_i); parent
    configurations never observed fall back to the uniform distribution."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    scorer = _Scorer(ds, dag.nodes)  # reuses the codes/arity extraction
    categories = tuple(
        tuple(ds.schema.column(name).categories) for name in dag.nodes
    )
    cpts: list[np.ndarray] = []
    for i in range(dag.n):
        r = scorer.arities[i]
        q = 1
        idx = np.zeros(scorer.n_rows, dtype=np.int64)
        for p in dag.parents[i]:
            idx = idx * scorer.arities[p] + scorer.codes[:, p]
            q *= scorer.arities[p]
        counts = (
            np.bincount(idx * r + scorer.codes[:, i], minlength=q * r)
            .reshape(q, r)
            .astype(np.float64)
        )
        n_ij = counts.sum(axis=1, keepdims=True)
        table = np.empty_like(counts)
        seen = (n_ij > 0)[:, 0]
        if alpha > 0:
            table = (counts + alpha) / (n_ij + alpha * r)
        else:
            table[seen] = counts[seen] / n_ij[seen]
        table[~seen] = 1.0 / r
        cpts.append(table)
    return BayesNet(dag=dag, cpts=tuple(cpts), categories=categories, alpha=alpha)


def _restrict(vars_: tuple[int, ...], table: np.ndarray, var: int, code: int):
    axis = vars_.index(var)
    return tuple(v for v in vars_ if v != var), table.take(code, axis=axis)


def _multiply(
    a_vars: tuple[int, ...],
    a: np.ndarray,
    b_vars: tuple[int, ...],
    b: np.ndarray,
    arity: dict[int, int],
) -> tuple[tuple[int, ...], np.ndarray]:
    out_vars = tuple(sorted(set(a_vars) | set(b_vars)))
    a_shape = [arity[v] if v in a_vars else 1 for v in out_vars]
    b_shape = [arity[v] if v in b_vars else 1 for v in out_vars]
    return out_vars, a.reshape(a_shape) * b.reshape(b_shape)


def query(bn: BayesNet, evidence: dict[str, str], target: str) -> dict[str, float]:
    """Exact posterior P(target | evidence) by variable elimination with a
    min-degree elimination order; the returned distribution sums to 1."""
    t = bn.dag.index(target)
    arity = {i: bn.arity(i) for i in range(bn.dag.n)}
    ev_codes: dict[int, int] = {}
    for name, value in evidence.items():
        i = bn.dag.index(name)
        if value not in bn.categories[i]:
            raise UnknownCategory(name, str(value))
        ev_codes[i] = bn.categories[i].index(value)
    if t in ev_codes:
        raise ValueError(f"target {target!r} cannot also be evidence")

    # one factor per node over (parents..., node), axes sorted by index
    factors: list[tuple[tuple[int, ...], np.ndarray]] = []
    for i in range(bn.dag.n):
        vars_ = bn.dag.parents[i] + (i,)
        shape = [arity[v] for v in vars_]
        table = bn.cpts[i].reshape(shape)
        order = tuple(np.argsort(vars_))
        vars_sorted = tuple(vars_[k] for k in order)
        table = np.transpose(table, order)
        for v in vars_sorted:
            if v in ev_codes:
                vars_sorted, table = _restrict(vars_sorted, table, v, ev_codes[v])
        factors.append((vars_sorted, table))

    to_eliminate = set(range(bn.dag.n)) - set(ev_codes) - {t}
    while to_eliminate:
        # min-degree: fewest co-occurring other variables, ties to low index
        def degree(v: int) -> tuple[int, int]:
            scope: set[int] = set()
            for fv, _ in factors:
                if v in fv:
                    scope.update(fv)
            return (len(scope - {v}), v)

        v = min(to_eliminate, key=degree)
        to_eliminate.remove(v)
        touching = [(fv, ft) for fv, ft in factors if v in fv]
        factors = [(fv, ft) for fv, ft in factors if v not in fv]
        pv, pt = touching[0]
        for fv, ft in touching[1:]:
            pv, pt = _multiply(pv, pt, fv, ft, arity)
        pt = pt.sum(axis=pv.index(v))
        pv = tuple(x for x in pv if x != v)
        factors.append((pv, pt))

    rv: tuple[int, ...] = ()
    rt = np.ones(())
    for fv, ft in factors:
        rv, rt = _multiply(rv, rt, fv, ft, arity)
    assert rv == (t,)
    total = float(rt.sum())
    if total <= 0.0:
        raise ZeroProbabilityEvidence("evidence has zero probability under the model")
    dist = rt / total
    return {cat: float(p) for cat, p in zip(bn.categories[t], dist)}


@dataclass(frozen=True)
class CausalPaths:
    """Parents of the target (direct) and non-parent ancestors (indirect)."""

    target: str
    direct: tuple[str, ...]
    indirect: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "direct": list(self.direct),
            "indirect": list(self.indirect),
        }


def causal_paths(dag: Dag, target: str) -> CausalPaths:
    t = dag.index(target)
    direct = set(dag.parents[t])
    indirect = set(dag.ancestors(t)) - direct
    return CausalPaths(
        target=target,
        direct=tuple(dag.nodes[i] for i in sorted(direct)),
        indirect=tuple(dag.nodes[i] for i in sorted(indirect)),
    )
