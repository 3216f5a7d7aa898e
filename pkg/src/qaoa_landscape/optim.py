"""Local minimization and basin-hopping over the circuit-angle landscape.

The minimizer is a limited-memory BFGS with strong-Wolfe line search
(c1=1e-4, c2=0.9, memory 10) converging on the root-mean-square gradient.
Basin-hopping perturbs every angle uniformly, re-minimizes, records every
converged minimum under energy deduplication, and walks by the Metropolis
criterion.  Runs are deterministic functions of (graph, L, config, seed).
"""

from __future__ import annotations

import bisect
import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .graphs import WeightedGraph, SolutionSet, brute_force_maxcut, serialize_graph
from .sim import CostDiagonal, ParameterVector, cost_diagonal, evolve, solution_probability, state_probability

__all__ = [
    "BasinHoppingConfig",
    "MinimumRecord",
    "MinimaDatabase",
    "MinimizationError",
    "LocalMinimum",
    "lbfgs_minimize",
    "make_objective",
    "hessian_fd",
    "basin_hop",
    "insert_deduped",
    "save_database",
    "load_database",
    "graph_content_id",
]


class MinimizationError(RuntimeError):
    """Local minimization failed; carries the best point reached."""

    def __init__(self, message, x=None, energy=None, rms=None):
        super().__init__(message)
        self.x = x
        self.energy = energy
        self.rms = rms


@dataclass
class BasinHoppingConfig:
    steps: int = 10000
    temperature: float = 1.0
    max_perturbation: float = 1.0
    rms_threshold: float = 1e-10
    dedup_energy: float = 1e-9
    # smallest Hessian eigenvalue a stationary point must exceed to be
    # databased as a minimum; excludes the exactly flat stationary manifolds
    # these landscapes contain (e.g. whole zero-gradient lines at <H_C>=0)
    min_curvature: float = 1e-9
    seed: int = 0
    max_lbfgs_iterations: int = 10000

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        for name in ("temperature", "max_perturbation", "rms_threshold", "dedup_energy"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class LocalMinimum:
    x: np.ndarray
    energy: float
    gradient: np.ndarray
    rms_gradient: float
    iterations: int
    n_evaluations: int


@dataclass
class MinimumRecord:
    theta: ParameterVector
    energy: float
    rms_gradient: float
    p_solution: float
    p_alternative: float | None
    discovery_step: int


@dataclass
class MinimaDatabase:
    """Energy-sorted, energy-deduplicated collection of local minima."""

    graph_id: str
    layers: int
    records: list[MinimumRecord] = field(default_factory=list)
    run_config: BasinHoppingConfig = field(default_factory=BasinHoppingConfig)
    accept_fraction: float = float("nan")
    failed_steps: int = 0
    rejected_stationary: int = 0
    source: str = "basin-hopping"

    def energies(self):
        return [r.energy for r in self.records]

    def find_index(self, energy: float) -> int | None:
        """Index of the record within dedup_energy of `energy`, else None."""
        es = self.energies()
        k = bisect.bisect_left(es, energy)
        for idx in (k - 1, k):
            if 0 <= idx < len(es) and abs(es[idx] - energy) < self.run_config.dedup_energy:
                return idx
        return None

    @property
    def global_minimum(self) -> MinimumRecord:
        if not self.records:
            raise ValueError("empty database")
        return self.records[0]


def insert_deduped(db: MinimaDatabase, rec: MinimumRecord) -> bool:
    """Insert keeping energy order; refuse records within dedup_energy of an
    existing one.  Returns True when inserted."""
    if db.find_index(rec.energy) is not None:
        return False
    k = bisect.bisect_left(db.energies(), rec.energy)
    db.records.insert(k, rec)
    return True


def graph_content_id(g: WeightedGraph) -> str:
    """Short stable identifier derived from the canonical serialization."""
    h = hashlib.sha256(serialize_graph(g).encode()).hexdigest()
    return f"g{g.n_vertices}-{h[:10]}"


def make_objective(diag: CostDiagonal):
    """(E, grad) callable on the flat angle vector; the hot path."""
    vals = diag.values
    n = diag.n_qubits

    def func(x):
        L = x.shape[0] // 2
        e, grad = _kernels.energy_and_gradient(vals, x[:L], x[L:], n)
        return float(e), np.asarray(grad)

    return func


# ---------------------------------------------------------------------------
# L-BFGS with strong-Wolfe line search
# ---------------------------------------------------------------------------

_C1 = 1e-4
_C2 = 0.9


def _cubic_min(a, fa, dfa, b, fb, dfb):
    """Minimizer of the cubic interpolant on [a, b]; None when ill-formed."""
    h = b - a
    if h == 0:
        return None
    d1 = dfa + dfb - 3.0 * (fb - fa) / h
    disc = d1 * d1 - dfa * dfb
    if disc < 0:
        return None
    s = math.sqrt(disc) * (1.0 if h > 0 else -1.0)
    denom = dfb - dfa + 2.0 * s
    if denom == 0:
        return None
    t = b - h * (dfb + s - d1) / denom
    lo, hi = (a, b) if a < b else (b, a)
    if not (lo < t < hi):
        return None
    return t


def _zoom(evaluate, phi0, dphi0, a_lo, phi_lo, dphi_lo, a_hi, phi_hi, dphi_hi):
    for _ in range(30):
        a = _cubic_min(a_lo, phi_lo, dphi_lo, a_hi, phi_hi, dphi_hi)
        width = abs(a_hi - a_lo)
        if a is None or abs(a - a_lo) < 0.05 * width or abs(a - a_hi) < 0.05 * width:
            a = 0.5 * (a_lo + a_hi)
        phi, dphi, f, g = evaluate(a)
        if phi > phi0 + _C1 * a * dphi0 or phi >= phi_lo:
            a_hi, phi_hi, dphi_hi = a, phi, dphi
        else:
            if abs(dphi) <= -_C2 * dphi0:
                return a, f, g
            if dphi * (a_hi - a_lo) >= 0:
                a_hi, phi_hi, dphi_hi = a_lo, phi_lo, dphi_lo
            a_lo, phi_lo, dphi_lo = a, phi, dphi
        if abs(a_hi - a_lo) < 1e-16:
            break
    # accept the best admissible point found, else fail
    if phi_lo <= phi0 + _C1 * a_lo * dphi0 and a_lo > 0:
        phi, dphi, f, g = evaluate(a_lo)
        return a_lo, f, g
    return None


def _wolfe_search(func, x, d, f0, g0, alpha0):
    """Strong-Wolfe step along d.  Returns (alpha, f, g, n_evals) or None."""
    dphi0 = float(g0 @ d)
    if dphi0 >= 0:
        return None
    evals = [0]

    def evaluate(a):
        evals[0] += 1
        f, g = func(x + a * d)
        if not np.isfinite(f):
            raise MinimizationError("objective returned NaN/inf", x=x, energy=f0)
        return f, float(g @ d), f, g

    a_prev, phi_prev, dphi_prev = 0.0, f0, dphi0
    a = alpha0
    for i in range(12):
        phi, dphi, f, g = evaluate(a)
        if phi > f0 + _C1 * a * dphi0 or (i > 0 and phi >= phi_prev):
            r = _zoom(evaluate, f0, dphi0, a_prev, phi_prev, dphi_prev, a, phi, dphi)
            return None if r is None else (*r, evals[0])
        if abs(dphi) <= -_C2 * dphi0:
            return a, f, g, evals[0]
        if dphi >= 0:
            r = _zoom(evaluate, f0, dphi0, a, phi, dphi, a_prev, phi_prev, dphi_prev)
            return None if r is None else (*r, evals[0])
        a_prev, phi_prev, dphi_prev = a, phi, dphi
        a = 2.0 * a
    return None


def _rms(g):
    return float(np.sqrt(np.mean(g * g)))


def lbfgs_minimize(x0, func, *, rms_threshold: float = 1e-10,
                   max_iterations: int = 10000, memory: int = 10,
                   max_first_step: float = 0.5, polish_rms: float = 1e-6) -> LocalMinimum:
    """Minimize func(x) -> (E, grad) from x0 until rms(grad) <= threshold.

    Runs Wolfe-line-search L-BFGS down to rms(grad) <= polish_rms; below that
    the energy no longer resolves in double precision while the analytic
    gradient still does, so the endgame switches to line-search-free L-BFGS
    steps backtracked on the gradient norm.  Energy is non-increasing across
    the line-search phase; the first step is capped at max_first_step per
    component.  Failure raises MinimizationError carrying the best point.
    """
    x = np.array(x0, dtype=np.float64)
    f, g = func(x)
    n_evals = 1
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise MinimizationError("objective not finite at start", x=x, energy=f)
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rms = _rms(g)
    polish = False
    armijo_budget = 5
    it = 0
    while it < max_iterations:
        if rms <= rms_threshold:
            return LocalMinimum(x=x, energy=f, gradient=g, rms_gradient=rms,
                                iterations=it, n_evaluations=n_evals)
        if not polish and rms <= polish_rms:
            polish = True
        d = _two_loop_direction(g, s_hist, y_hist)
        if float(d @ g) >= 0.0:
            s_hist.clear()
            y_hist.clear()
            d = -g.copy()
        if not polish:
            alpha0 = 1.0
            if it == 0:
                dmax = float(np.max(np.abs(d)))
                if dmax > max_first_step:
                    alpha0 = max_first_step / dmax
            result = _wolfe_search(func, x, d, f, g, alpha0)
            if result is None and s_hist:
                s_hist.clear()
                y_hist.clear()
                result = _wolfe_search(func, x, -g, f, g, min(1.0, 1.0 / max(1e-12, rms)))
            if result is None and armijo_budget > 0:
                armijo_budget -= 1
                result = _armijo_fallback(func, x, f, g)
            if result is None:
                if rms <= 1e-3:
                    # energy differences are at roundoff; finish on gradient norm
                    polish = True
                    continue
                raise MinimizationError("line search failed", x=x, energy=f, rms=rms)
            alpha, f_new, g_new, ev = result
            n_evals += ev
            s = alpha * d
        else:
            s, f_new, g_new, ev = _newton_polish_step(func, x, g, rms)
            n_evals += ev
            if s is None:
                raise MinimizationError("Newton polish stalled", x=x, energy=f, rms=rms)
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        x = x + s
        f, g = f_new, g_new
        rms = _rms(g)
        it += 1
    raise MinimizationError("no convergence within max iterations",
                            x=x, energy=f, rms=rms)


def _armijo_fallback(func, x, f0, g0, halvings=60):
    """Sufficient-decrease backtracking along steepest descent; last resort
    when the strong-Wolfe search gives up in awkward curvature regions."""
    d = -g0
    dphi0 = float(g0 @ d)
    if dphi0 >= 0:
        return None
    alpha = min(1.0, 1.0 / max(1e-12, float(np.linalg.norm(d))))
    evals = 0
    for _ in range(halvings):
        f, g = func(x + alpha * d)
        evals += 1
        if np.isfinite(f) and f <= f0 + _C1 * alpha * dphi0:
            return alpha, f, g, evals
        alpha *= 0.5
    return None


def _newton_polish_step(func, x, g, rms, max_norm=0.5, halvings=25):
    """One damped Newton step on the gradient, from the finite-difference
    Hessian with eigenvalue magnitudes floored; halved until rms decreases."""
    n = x.size
    H = hessian_fd(func, x)
    evals = 2 * n
    w, V = np.linalg.eigh(H)
    floor = max(1e-12, 1e-14 * float(np.max(np.abs(w))))
    winv = 1.0 / np.maximum(np.abs(w), floor)
    d = -V @ (winv * (V.T @ g))
    nrm = float(np.linalg.norm(d))
    step = d * (max_norm / nrm) if nrm > max_norm else d
    for _ in range(halvings):
        f_new, g_new = func(x + step)
        evals += 1
        if _rms(g_new) < rms:
            return step, f_new, g_new, evals
        step = 0.5 * step
    return None, None, None, evals


def hessian_fd(func, x, h: float = 1e-5) -> np.ndarray:
    """Symmetrized central-difference Hessian of the (E, grad) objective."""
    n = x.size
    H = np.empty((n, n))
    for k in range(n):
        xp = x.copy()
        xp[k] += h
        xm = x.copy()
        xm[k] -= h
        H[:, k] = (func(xp)[1] - func(xm)[1]) / (2.0 * h)
    return 0.5 * (H + H.T)


def _two_loop_direction(g, s_hist, y_hist):
    q = -g.copy()
    if not s_hist:
        return q
    m = len(s_hist)
    alphas = np.empty(m)
    rhos = np.empty(m)
    for k in range(m - 1, -1, -1):
        rhos[k] = 1.0 / float(y_hist[k] @ s_hist[k])
        alphas[k] = rhos[k] * float(s_hist[k] @ q)
        q -= alphas[k] * y_hist[k]
    gamma = float(s_hist[-1] @ y_hist[-1]) / float(y_hist[-1] @ y_hist[-1])
    q *= gamma
    for k in range(m):
        beta = rhos[k] * float(y_hist[k] @ q)
        q += (alphas[k] - beta) * s_hist[k]
    return q


# ---------------------------------------------------------------------------
# basin-hopping
# ---------------------------------------------------------------------------

def _record_from_minimum(res: LocalMinimum, diag: CostDiagonal,
                         sols: SolutionSet, step: int) -> MinimumRecord:
    theta = ParameterVector.from_flat(res.x)
    psi = evolve(diag, theta)
    p = solution_probability(psi, sols)
    p_alt = state_probability(psi, sols.alternative) if sols.alternative else None
    return MinimumRecord(theta=theta, energy=res.energy, rms_gradient=res.rms_gradient,
                         p_solution=p, p_alternative=p_alt, discovery_step=step)


def basin_hop(g: WeightedGraph, layers: int, cfg: BasinHoppingConfig | None = None,
              *, graph_id: str | None = None,
              solutions: SolutionSet | None = None,
              _rng=None) -> MinimaDatabase:
    """Metropolis basin-hopping on the 2L-angle landscape of one graph.

    Every converged minimum (accepted or not) enters the database under
    energy deduplication.  Deterministic for a fixed seed.
    """
    cfg = cfg or BasinHoppingConfig()
    if layers < 1:
        raise ValueError("layers must be >= 1")
    diag = cost_diagonal(g)
    sols = solutions if solutions is not None else brute_force_maxcut(g, include_alternative=True)
    db = MinimaDatabase(graph_id=graph_id or graph_content_id(g), layers=layers,
                        run_config=replace(cfg))
    func = make_objective(diag)
    rng = _rng if _rng is not None else np.random.default_rng(cfg.seed)
    dim = 2 * layers

    def minimize_from(x):
        return lbfgs_minimize(x, func, rms_threshold=cfg.rms_threshold,
                              max_iterations=cfg.max_lbfgs_iterations)

    def certify_and_insert(res, step):
        # cheap path: a known energy never re-triggers the curvature check
        if db.find_index(res.energy) is not None:
            return
        lam_min = float(np.linalg.eigvalsh(hessian_fd(func, res.x))[0])
        if lam_min < cfg.min_curvature:
            db.rejected_stationary += 1
            return
        insert_deduped(db, _record_from_minimum(res, diag, sols, step))

    # initial point: uniform over [-pi, pi]^(2L); retry fresh draws on failure
    current = None
    failures = 0
    for _ in range(100):
        try:
            current = minimize_from(rng.uniform(-np.pi, np.pi, dim))
            break
        except MinimizationError:
            failures += 1
    if current is None:
        raise RuntimeError("could not converge any starting point")
    certify_and_insert(current, 0)

    accepted = 0
    for step in range(1, cfg.steps + 1):
        trial = current.x + rng.uniform(-1.0, 1.0, dim) * cfg.max_perturbation
        try:
            res = minimize_from(trial)
        except MinimizationError:
            failures += 1
            if failures > cfg.steps // 2:
                raise RuntimeError(
                    f"more than half of basin-hopping steps failed ({failures})")
            continue
        certify_and_insert(res, step)
        if res.energy < current.energy:
            take = True
        else:
            take = rng.uniform() < math.exp(-(res.energy - current.energy) / cfg.temperature)
        if take:
            current = res
            accepted += 1
    db.accept_fraction = accepted / cfg.steps
    db.failed_steps = failures
    return db


def _basin_hop_stream(payload):
    g, layers, cfg, stream_index, graph_id, solutions = payload
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(stream_index,)))
    return basin_hop(g, layers, cfg, graph_id=graph_id, solutions=solutions, _rng=rng)


def basin_hop_parallel(g: WeightedGraph, layers: int, cfg: BasinHoppingConfig,
                       *, jobs: int, graph_id: str | None = None,
                       solutions: SolutionSet | None = None) -> MinimaDatabase:
    """Split the step budget over independent streams (distinct spawned
    seeds) and merge their databases under energy dedup.  Deterministic for
    fixed (seed, jobs); stream results are merged in stream order."""
    if jobs <= 1:
        return basin_hop(g, layers, cfg, graph_id=graph_id, solutions=solutions)
    from concurrent.futures import ProcessPoolExecutor

    per = cfg.steps // jobs
    extra = cfg.steps % jobs
    payloads = []
    for k in range(jobs):
        steps_k = per + (1 if k < extra else 0)
        if steps_k < 1:
            continue
        payloads.append((g, layers, replace(cfg, steps=steps_k), k, graph_id, solutions))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        dbs = list(ex.map(_basin_hop_stream, payloads))
    merged = dbs[0]
    total_steps = sum(p[2].steps for p in payloads)
    accepted = merged.accept_fraction * payloads[0][2].steps
    for db, payload in zip(dbs[1:], payloads[1:]):
        for rec in db.records:
            insert_deduped(merged, rec)
        merged.failed_steps += db.failed_steps
        merged.rejected_stationary += db.rejected_stationary
        accepted += db.accept_fraction * payload[2].steps
    merged.accept_fraction = accepted / total_steps
    merged.run_config = replace(cfg)
    return merged


# ---------------------------------------------------------------------------
# database files
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.16e}"


def save_database(db: MinimaDatabase, path) -> None:
    """Plain-text database: key-value header, then one record per line
    (energy, rms, p_solution, p_alternative or '-', then the 2L angles)."""
    cfg = db.run_config
    lines = [
        "# qaoa-landscape minima database",
        "format 1",
        f"graph_id {db.graph_id}",
        f"layers {db.layers}",
        f"steps {cfg.steps}",
        f"temperature {_fmt(cfg.temperature)}",
        f"max_perturbation {_fmt(cfg.max_perturbation)}",
        f"rms_threshold {_fmt(cfg.rms_threshold)}",
        f"dedup_energy {_fmt(cfg.dedup_energy)}",
        f"min_curvature {_fmt(cfg.min_curvature)}",
        f"seed {cfg.seed}",
        f"backend {_kernels.backend_name()}",
        f"source {db.source}",
        f"accept_fraction {_fmt(db.accept_fraction)}",
        f"failed_steps {db.failed_steps}",
        f"rejected_stationary {db.rejected_stationary}",
        f"records {len(db.records)}",
    ]
    for r in db.records:
        alt = _fmt(r.p_alternative) if r.p_alternative is not None else "-"
        angles = " ".join(_fmt(a) for a in r.theta.flat)
        lines.append(f"{_fmt(r.energy)} {_fmt(r.rms_gradient)} {_fmt(r.p_solution)} "
                     f"{alt} {r.discovery_step} {angles}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_database(path) -> MinimaDatabase:
    with open(path) as fh:
        raw = [ln.rstrip("\n") for ln in fh]
    header = {}
    body_start = None
    for k, ln in enumerate(raw):
        if ln.startswith("#") or not ln.strip():
            continue
        key, _, val = ln.partition(" ")
        header[key] = val
        if key == "records":
            body_start = k + 1
            break
    if body_start is None:
        raise ValueError(f"{path}: missing 'records' header line")
    cfg = BasinHoppingConfig(
        steps=int(header["steps"]),
        temperature=float(header["temperature"]),
        max_perturbation=float(header["max_perturbation"]),
        rms_threshold=float(header["rms_threshold"]),
        dedup_energy=float(header["dedup_energy"]),
        min_curvature=float(header.get("min_curvature", "1e-9")),
        seed=int(header["seed"]),
    )
    layers = int(header["layers"])
    db = MinimaDatabase(graph_id=header["graph_id"], layers=layers, run_config=cfg,
                        accept_fraction=float(header.get("accept_fraction", "nan")),
                        failed_steps=int(header.get("failed_steps", "0")),
                        rejected_stationary=int(header.get("rejected_stationary", "0")),
                        source=header.get("source", "basin-hopping"))
    n_records = int(header["records"])
    for ln in raw[body_start:body_start + n_records]:
        parts = ln.split()
        energy, rms, p = float(parts[0]), float(parts[1]), float(parts[2])
        p_alt = None if parts[3] == "-" else float(parts[3])
        step = int(parts[4])
        angles = np.array([float(v) for v in parts[5:]], dtype=np.float64)
        if angles.size != 2 * layers:
            raise ValueError(f"{path}: record has {angles.size} angles, expected {2 * layers}")
        db.records.append(MinimumRecord(
            theta=ParameterVector.from_flat(angles), energy=energy, rms_gradient=rms,
            p_solution=p, p_alternative=p_alt, discovery_step=step))
    return db
