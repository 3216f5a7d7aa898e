"""Transition-state search and kinetic-network assembly.

Candidate saddles come from a doubly-nudged elastic band relaxed between two
minima; each candidate is refined by hybrid eigenvector-following (smallest
Hessian eigenpair by two-vector Rayleigh-Ritz iteration on finite-difference
Hessian-vector products, a bounded uphill step along that eigenvector, and
minimization in the orthogonal complement), finishing with plain Newton
iterations once inside the quadratic region.  Transition states are accepted
only with exactly one negative Hessian eigenvalue.  The missing-connection
pass links database minima through Dijkstra shortest paths on an auxiliary
graph weighted by the state-overlap distance.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .graphs import WeightedGraph, SolutionSet, brute_force_maxcut
from .optim import (
    BasinHoppingConfig,
    LocalMinimum,
    MinimaDatabase,
    MinimizationError,
    MinimumRecord,
    hessian_fd,
    insert_deduped,
    lbfgs_minimize,
    make_objective,
)
from .sim import (
    CostDiagonal,
    ParameterVector,
    StateVector,
    cost_diagonal,
    evolve,
    overlap_distance,
    solution_probability,
    state_probability,
)

__all__ = [
    "LandscapeConfig",
    "TransitionStateRecord",
    "KineticTransitionNetwork",
    "TransitionStateRejected",
    "DnebResult",
    "angle_periods",
    "dneb_candidates",
    "refine_transition_state",
    "path_endpoints",
    "connect_database",
    "save_network",
    "load_network",
    "smallest_eigenpair",
]


@dataclass
class LandscapeConfig:
    interior_images: int = 11
    spring_constant: float = 1.0
    band_rms: float = 1e-4
    band_max_iterations: int = 1500
    ts_rms: float = 1e-8
    eig_threshold: float = 1e-8
    uphill_trust: float = 0.2
    endpoint_displacement: float = 1e-4
    budget_factor: int = 10
    max_ef_cycles: int = 120


class TransitionStateRejected(RuntimeError):
    """Refinement converged to a stationary point that is not an index-1 saddle."""

    def __init__(self, index, x, energy):
        super().__init__(f"stationary point has Hessian index {index}")
        self.index = index
        self.x = x
        self.energy = energy


@dataclass
class TransitionStateRecord:
    theta: ParameterVector
    energy: float
    rms_gradient: float
    negative_eigenvalue: float
    second_eigenvalue: float
    min_a: int
    min_b: int
    degenerate: bool = False


@dataclass
class KineticTransitionNetwork:
    minima: MinimaDatabase
    transition_states: list[TransitionStateRecord] = field(default_factory=list)
    attempts_used: int = 0
    budget: int = 0

    def adjacency(self):
        adj = [set() for _ in self.minima.records]
        for ts in self.transition_states:
            if ts.min_a != ts.min_b:
                adj[ts.min_a].add(ts.min_b)
                adj[ts.min_b].add(ts.min_a)
        return adj

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = set()
        comps = []
        for start in range(len(self.minima.records)):
            if start in seen:
                continue
            comp = []
            stack = [start]
            seen.add(start)
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    @property
    def is_connected(self) -> bool:
        return len(self.components()) <= 1


# ---------------------------------------------------------------------------
# doubly-nudged elastic band
# ---------------------------------------------------------------------------

def angle_periods(g: WeightedGraph, layers: int) -> np.ndarray:
    """Per-coordinate periods for shortest-arc interpolation: 4*pi for the
    cost angles on integer-weight graphs (0 disables wrapping otherwise), and
    2*pi for the mixer angles."""
    gamma_p = 4.0 * np.pi if g.has_integer_weights else 0.0
    return np.array([gamma_p] * layers + [2.0 * np.pi] * layers)


def _shortest_arc(a, b, periods):
    d = b - a
    for k in range(d.size):
        p = periods[k] if periods is not None else 0.0
        if p > 0:
            d[k] = (d[k] + 0.5 * p) % p - 0.5 * p
    return d


@dataclass
class DnebResult:
    candidates: list[np.ndarray]
    converged: bool
    iterations: int
    band_rms: float
    images: np.ndarray
    energies: np.ndarray


def _band_forces(func, images, a, b, e_a, e_b, k_spring):
    """DNEB projected force on each interior image; returns (forces, energies)."""
    n_img, dim = images.shape
    energies = np.empty(n_img)
    grads = np.empty_like(images)
    for i in range(n_img):
        energies[i], grads[i] = func(images[i])
    chain = np.vstack([a, images, b])
    e_chain = np.concatenate([[e_a], energies, [e_b]])
    forces = np.empty_like(images)
    for i in range(n_img):
        x_m, x_0, x_p = chain[i], chain[i + 1], chain[i + 2]
        e_m, e_0, e_p = e_chain[i], e_chain[i + 1], e_chain[i + 2]
        # improved tangent estimate from neighbouring energies
        if e_p > e_0 > e_m:
            tau = x_p - x_0
        elif e_p < e_0 < e_m:
            tau = x_0 - x_m
        else:
            dmax = max(abs(e_p - e_0), abs(e_m - e_0))
            dmin = min(abs(e_p - e_0), abs(e_m - e_0))
            if e_p > e_m:
                tau = (x_p - x_0) * dmax + (x_0 - x_m) * dmin
            else:
                tau = (x_p - x_0) * dmin + (x_0 - x_m) * dmax
        nt = np.linalg.norm(tau)
        tau = tau / nt if nt > 0 else tau
        f_true = -grads[i]
        f_perp = f_true - (f_true @ tau) * tau
        r_p = x_p - x_0
        r_m = x_m - x_0
        f_spring_nudged = k_spring * (np.linalg.norm(r_p) - np.linalg.norm(r_m)) * tau
        f_spring = k_spring * (r_p + r_m)
        fs_perp = f_spring - (f_spring @ tau) * tau
        np_perp = np.linalg.norm(f_perp)
        if np_perp > 0:
            g_hat = f_perp / np_perp
            fs_dneb = fs_perp - (fs_perp @ g_hat) * g_hat
        else:
            fs_dneb = fs_perp
        # stabilizing double-nudge damping
        fs2 = float(fs_perp @ fs_perp)
        if fs2 > 0:
            fs_dneb = fs_dneb * (2.0 / math.pi) * math.atan(float(f_perp @ f_perp) / fs2)
        forces[i] = f_perp + f_spring_nudged + fs_dneb
    return forces, energies


def dneb_candidates(func, a: np.ndarray, b: np.ndarray,
                    cfg: LandscapeConfig | None = None,
                    periods: np.ndarray | None = None) -> DnebResult:
    """Relax a doubly-nudged elastic band between two minima and return the
    interior images that are energy maxima along the chain."""
    cfg = cfg or LandscapeConfig()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    arc = _shortest_arc(a.copy(), b.copy(), periods)
    if float(np.max(np.abs(arc))) < 1e-10:
        raise ValueError("band endpoints are identical")
    n_img = cfg.interior_images
    ts_frac = np.arange(1, n_img + 1) / (n_img + 1)
    images = a[None, :] + ts_frac[:, None] * arc[None, :]
    e_a, _ = func(a)
    e_b, _ = func(b)

    # L-BFGS-style relaxation on the projected band force (no line search)
    flat = images.reshape(-1)
    s_hist, y_hist = [], []
    g_prev = None
    max_move = 0.1
    it = 0
    rms = np.inf
    for it in range(1, cfg.band_max_iterations + 1):
        forces, energies = _band_forces(func, flat.reshape(n_img, -1), a, b, e_a, e_b,
                                        cfg.spring_constant)
        g = -forces.reshape(-1)
        rms = float(np.sqrt(np.mean(g * g)))
        if rms <= cfg.band_rms:
            break
        if g_prev is not None:
            s = flat - flat_prev
            y = g - g_prev
            if float(s @ y) > 1e-12:
                s_hist.append(s)
                y_hist.append(y)
                if len(s_hist) > 10:
                    s_hist.pop(0)
                    y_hist.pop(0)
        d = _two_loop(g, s_hist, y_hist)
        if float(d @ g) >= 0:
            s_hist.clear()
            y_hist.clear()
            d = -g
        nd = float(np.max(np.abs(d)))
        if nd > max_move:
            d = d * (max_move / nd)
        flat_prev = flat.copy()
        g_prev = g
        flat = flat + d
    images = flat.reshape(n_img, -1)
    energies = np.array([func(images[i])[0] for i in range(n_img)])
    converged = rms <= cfg.band_rms
    candidates = []
    if converged:
        e_chain = np.concatenate([[e_a], energies, [e_b]])
        for i in range(1, n_img + 1):
            if e_chain[i] >= e_chain[i - 1] and e_chain[i] >= e_chain[i + 1]:
                candidates.append(images[i - 1].copy())
    return DnebResult(candidates=candidates, converged=converged, iterations=it,
                      band_rms=rms, images=images, energies=energies)


def _two_loop(g, s_hist, y_hist):
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
    q *= float(s_hist[-1] @ y_hist[-1]) / float(y_hist[-1] @ y_hist[-1])
    for k in range(m):
        beta = rhos[k] * float(y_hist[k] @ q)
        q += (alphas[k] - beta) * s_hist[k]
    return q


# ---------------------------------------------------------------------------
# hybrid eigenvector-following refinement
# ---------------------------------------------------------------------------

def _hvp(func, x, v, h=1e-5):
    """Hessian-vector product by central differences of the analytic gradient."""
    return (func(x + h * v)[1] - func(x - h * v)[1]) / (2.0 * h)


def smallest_eigenpair(func, x, v0=None, tol=1e-9, max_iter=80):
    """Smallest Hessian eigenpair by Rayleigh-Ritz iteration in the
    two-dimensional subspace spanned by the estimate and its residual."""
    n = x.size
    if v0 is None:
        v = 1.0 / (1.0 + np.arange(n))
    else:
        v = np.asarray(v0, dtype=np.float64).copy()
    v /= np.linalg.norm(v)
    hv = _hvp(func, x, v)
    lam = float(v @ hv)
    for _ in range(max_iter):
        resid = hv - lam * v
        if float(np.linalg.norm(resid)) <= tol * max(1.0, abs(lam)):
            break
        w = resid - float(resid @ v) * v
        nw = float(np.linalg.norm(w))
        if nw < 1e-14:
            break
        w /= nw
        hw = _hvp(func, x, w)
        a12 = 0.5 * (float(v @ hw) + float(w @ hv))
        small = np.array([[lam, a12], [a12, float(w @ hw)]])
        vals, vecs = np.linalg.eigh(small)
        c = vecs[:, 0]
        v_new = c[0] * v + c[1] * w
        hv_new = c[0] * hv + c[1] * hw
        nv = float(np.linalg.norm(v_new))
        v = v_new / nv
        hv = hv_new / nv
        lam = float(v @ hv)
    return lam, v


def _subspace_minimize(func, x, v, rms_target, max_iter=40):
    """Minimize in the orthogonal complement of v (v held fixed)."""

    def proj_func(z):
        e, g = func(z)
        return e, g - float(g @ v) * v

    try:
        res = lbfgs_minimize(x, proj_func, rms_threshold=rms_target,
                             max_iterations=max_iter, max_first_step=0.2)
        return res.x
    except MinimizationError as exc:
        return exc.x if exc.x is not None else x


def _newton_to_stationary(func, x, rms_target, max_iter=60, trust=0.2):
    """Plain Newton iterations on the gradient; converges to the nearest
    stationary point of any index inside the quadratic region."""
    x = x.copy()
    f, g = func(x)
    rms = float(np.sqrt(np.mean(g * g)))
    for _ in range(max_iter):
        if rms <= rms_target:
            return x, f, g, rms, True
        H = hessian_fd(func, x)
        w, V = np.linalg.eigh(H)
        floor = max(1e-12, 1e-14 * float(np.max(np.abs(w))))
        wsafe = np.where(np.abs(w) < floor, floor, w)
        step = -V @ ((V.T @ g) / wsafe)
        nrm = float(np.linalg.norm(step))
        if nrm > trust:
            step *= trust / nrm
        improved = False
        for _ in range(25):
            f_new, g_new = func(x + step)
            rms_new = float(np.sqrt(np.mean(g_new * g_new)))
            if rms_new < rms:
                x = x + step
                f, g, rms = f_new, g_new, rms_new
                improved = True
                break
            step *= 0.5
        if not improved:
            return x, f, g, rms, False
    return x, f, g, rms, rms <= rms_target


def refine_transition_state(func, candidate: np.ndarray,
                            cfg: LandscapeConfig | None = None):
    """Refine a saddle candidate to rms <= cfg.ts_rms with an index-1 check.

    Returns (x, energy, rms, eigenvalues, eigenvectors, degenerate).  Raises
    TransitionStateRejected when the converged point has index != 1, and
    MinimizationError when no stationary point is reached.
    """
    cfg = cfg or LandscapeConfig()
    x = np.array(candidate, dtype=np.float64)
    v = None
    for _ in range(cfg.max_ef_cycles):
        f, g = func(x)
        rms = float(np.sqrt(np.mean(g * g)))
        if rms <= 1e-5:
            break
        lam, v = smallest_eigenpair(func, x, v0=v)
        gv = float(g @ v)
        if lam < -1e-9:
            t = -gv / lam
            t = max(-cfg.uphill_trust, min(cfg.uphill_trust, t))
        else:
            t = 0.5 * cfg.uphill_trust * (1.0 if gv >= 0 else -1.0)
        x = x + t * v
        x = _subspace_minimize(func, x, v, rms_target=max(0.3 * rms, 1e-6))
    x, f, g, rms, ok = _newton_to_stationary(func, x, cfg.ts_rms)
    if not ok or rms > cfg.ts_rms:
        raise MinimizationError("transition-state refinement stalled", x=x,
                                energy=f, rms=rms)
    H = hessian_fd(func, x)
    w, V = np.linalg.eigh(H)
    index = int(np.sum(w < -cfg.eig_threshold))
    if index != 1:
        raise TransitionStateRejected(index, x, f)
    degenerate = bool(w[1] <= cfg.eig_threshold)
    return x, f, rms, w, V, degenerate


def path_endpoints(func, ts_x: np.ndarray, neg_vec: np.ndarray,
                   cfg: LandscapeConfig | None = None) -> tuple[LocalMinimum, LocalMinimum]:
    """Minimize the two points displaced +/-eps along the negative eigenvector."""
    cfg = cfg or LandscapeConfig()
    eps = cfg.endpoint_displacement
    lo = lbfgs_minimize(ts_x - eps * neg_vec, func)
    hi = lbfgs_minimize(ts_x + eps * neg_vec, func)
    return lo, hi


# ---------------------------------------------------------------------------
# missing-connection pass
# ---------------------------------------------------------------------------

def _dijkstra(n, weight, source, target):
    """Shortest path on the implicit complete graph; weight(u, v) >= 0."""
    dist = [math.inf] * n
    prev = [-1] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            break
        for v in range(n):
            if v == u or done[v]:
                continue
            nd = d + weight(u, v)
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if not done[target]:
        return None
    path = [target]
    while path[-1] != source:
        path.append(prev[path[-1]])
    return path[::-1]


def _band_attempt(func, theta_a, theta_b, cfg, periods):
    """DNEB + refinement + endpoint minimization for one pair; pure."""
    try:
        band = dneb_candidates(func, theta_a, theta_b, cfg, periods)
    except ValueError:
        return []
    results = []
    for cand in band.candidates:
        try:
            x, e_ts, rms, w, V, degen = refine_transition_state(func, cand, cfg)
        except (TransitionStateRejected, MinimizationError):
            continue
        try:
            lo, hi = path_endpoints(func, x, V[:, 0], cfg)
        except MinimizationError:
            continue
        results.append(dict(x=x, energy=e_ts, rms=rms, w0=float(w[0]), w1=float(w[1]),
                            degenerate=degen, lo=lo, hi=hi))
    return results


def _band_attempt_worker(payload):
    g, theta_a, theta_b, cfg, periods = payload
    func = make_objective(cost_diagonal(g))
    return _band_attempt(func, theta_a, theta_b, cfg, periods)


def connect_database(g: WeightedGraph, db: MinimaDatabase,
                     cfg: LandscapeConfig | None = None,
                     solutions: SolutionSet | None = None,
                     jobs: int = 1) -> KineticTransitionNetwork:
    """Grow a kinetic transition network until the minima interconnect.

    Pairs to try come from Dijkstra shortest paths between the global minimum
    and each still-unconnected minimum on the auxiliary complete graph where
    existing transition-state edges cost zero and unconnected pairs cost the
    state-overlap distance.  New minima discovered as path endpoints are
    inserted into (a connected-source copy of) the database.  With jobs > 1
    the independent band attempts of each path run in a process pool; results
    commit serially in submission order, so runs are deterministic for a
    fixed (database, config, jobs).
    """
    cfg = cfg or LandscapeConfig()
    diag = cost_diagonal(g)
    func = make_objective(diag)
    pool = None
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        pool = ProcessPoolExecutor(max_workers=jobs)
    want_alt = any(r.p_alternative is not None for r in db.records)
    sols = solutions if solutions is not None else brute_force_maxcut(
        g, include_alternative=want_alt)
    periods = angle_periods(g, db.layers)

    work = MinimaDatabase(graph_id=db.graph_id, layers=db.layers,
                          records=list(db.records), run_config=replace(db.run_config),
                          accept_fraction=db.accept_fraction,
                          failed_steps=db.failed_steps,
                          rejected_stationary=db.rejected_stationary,
                          source="connected")
    budget = cfg.budget_factor * max(1, len(work.records))
    net = KineticTransitionNetwork(minima=work, budget=budget)
    if len(work.records) < 2:
        return net

    # indices shift as new minima insert, so all bookkeeping below is by
    # record identity; TS index fields are resolved once at the end
    states: dict[int, StateVector] = {}
    ts_entries: list[dict] = []
    edge_ids: set[frozenset] = set()
    failed_pairs: set[frozenset] = set()
    attempts = 0

    def state_of(rec):
        key = id(rec)
        if key not in states:
            states[key] = evolve(diag, rec.theta)
        return states[key]

    def has_edge(ra, rb):
        return frozenset((id(ra), id(rb))) in edge_ids

    def ts_seen(energy, ra, rb):
        pair = {id(ra), id(rb)}
        for e in ts_entries:
            if abs(e["energy"] - energy) < work.run_config.dedup_energy and \
                    {id(e["rec_a"]), id(e["rec_b"])} == pair:
                return True
        return False

    def locate_or_insert(res: LocalMinimum):
        idx = work.find_index(res.energy)
        if idx is not None:
            return work.records[idx]
        theta = ParameterVector.from_flat(res.x)
        psi = evolve(diag, theta)
        p = solution_probability(psi, sols)
        p_alt = state_probability(psi, sols.alternative) if (want_alt and sols.alternative) else None
        rec = MinimumRecord(theta=theta, energy=res.energy, rms_gradient=res.rms_gradient,
                            p_solution=p, p_alternative=p_alt, discovery_step=-1)
        insert_deduped(work, rec)
        return work.records[work.find_index(res.energy)]

    def components():
        adj: dict[int, set[int]] = {id(r): set() for r in work.records}
        by_id = {id(r): r for r in work.records}
        for e in ts_entries:
            a, b = id(e["rec_a"]), id(e["rec_b"])
            if a != b and a in adj and b in adj:
                adj[a].add(b)
                adj[b].add(a)
        seen: set[int] = set()
        comps = []
        for r in work.records:
            if id(r) in seen:
                continue
            comp = []
            stack = [id(r)]
            seen.add(id(r))
            while stack:
                u = stack.pop()
                comp.append(by_id[u])
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            comps.append(comp)
        return comps

    def commit(ra, rb, results):
        added = False
        for r in results:
            rec_a = locate_or_insert(r["lo"])
            rec_b = locate_or_insert(r["hi"])
            if ts_seen(r["energy"], rec_a, rec_b):
                continue
            ts_entries.append(dict(theta=ParameterVector.from_flat(r["x"]),
                                   energy=r["energy"], rms=r["rms"],
                                   w0=r["w0"], w1=r["w1"],
                                   rec_a=rec_a, rec_b=rec_b,
                                   degenerate=r["degenerate"] or rec_a is rec_b))
            edge_ids.add(frozenset((id(rec_a), id(rec_b))))
            added = True
        if not added:
            failed_pairs.add(frozenset((id(ra), id(rb))))
        return added

    def attempt_batch(pairs):
        nonlocal attempts
        pairs = list(pairs)[: max(0, budget - attempts)]
        if not pairs:
            return False
        attempts += len(pairs)
        if pool is not None:
            payloads = [(g, ra.theta.flat, rb.theta.flat, cfg, periods)
                        for ra, rb in pairs]
            batches = list(pool.map(_band_attempt_worker, payloads))
        else:
            batches = [_band_attempt(func, ra.theta.flat, rb.theta.flat, cfg, periods)
                       for ra, rb in pairs]
        any_added = False
        for (ra, rb), results in zip(pairs, batches):
            if commit(ra, rb, results):
                any_added = True
        return any_added

    while attempts < budget:
        comps = components()
        if len(comps) == 1:
            break
        gm = work.records[0]
        gm_ids = {id(r) for c in comps if gm in c for r in c}
        targets = [r for r in work.records if id(r) not in gm_ids]
        progress = False
        for tgt in targets:
            if attempts >= budget:
                break
            if id(tgt) in gm_ids:
                continue
            snapshot = list(work.records)
            pos = {id(r): k for k, r in enumerate(snapshot)}

            def weight(u, v):
                ru, rv = snapshot[u], snapshot[v]
                if has_edge(ru, rv):
                    return 0.0
                s = max(1e-12, overlap_distance(state_of(ru), state_of(rv)))
                if frozenset((id(ru), id(rv))) in failed_pairs:
                    s += 2.0
                return s

            path = _dijkstra(len(snapshot), weight, 0, pos[id(tgt)])
            if path is None:
                continue
            gap_pairs = []
            for u, v in zip(path[:-1], path[1:]):
                ru, rv = snapshot[u], snapshot[v]
                if has_edge(ru, rv) or frozenset((id(ru), id(rv))) in failed_pairs:
                    continue
                gap_pairs.append((ru, rv))
            if attempt_batch(gap_pairs):
                progress = True
            comps = components()
            gm_ids = {id(r) for c in comps if gm in c for r in c}
        if not progress:
            # nearest untried inter-component pair, else report partial
            comps = components()
            if len(comps) == 1:
                break
            best = None
            for ci in range(len(comps)):
                for cj in range(ci + 1, len(comps)):
                    for ru in comps[ci]:
                        for rv in comps[cj]:
                            pair = frozenset((id(ru), id(rv)))
                            if pair in failed_pairs or has_edge(ru, rv):
                                continue
                            s = overlap_distance(state_of(ru), state_of(rv))
                            if best is None or s < best[0]:
                                best = (s, ru, rv)
            if best is None or attempts >= budget:
                break
            attempt_batch([(best[1], best[2])])

    if pool is not None:
        pool.shutdown()
    pos = {id(r): k for k, r in enumerate(work.records)}
    for e in ts_entries:
        ia, ib = pos[id(e["rec_a"])], pos[id(e["rec_b"])]
        net.transition_states.append(TransitionStateRecord(
            theta=e["theta"], energy=e["energy"], rms_gradient=e["rms"],
            negative_eigenvalue=e["w0"], second_eigenvalue=e["w1"],
            min_a=min(ia, ib), min_b=max(ia, ib), degenerate=e["degenerate"]))
    net.attempts_used = attempts
    net.transition_states.sort(key=lambda t: (t.energy, t.min_a, t.min_b))
    return net


# ---------------------------------------------------------------------------
# network files
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.16e}"


def save_network(net: KineticTransitionNetwork, ts_path) -> None:
    """Transition-state file; pairs with the post-connection minima file."""
    lines = [
        "# qaoa-landscape transition states",
        "format 1",
        f"graph_id {net.minima.graph_id}",
        f"layers {net.minima.layers}",
        f"attempts_used {net.attempts_used}",
        f"budget {net.budget}",
        f"records {len(net.transition_states)}",
    ]
    for ts in net.transition_states:
        angles = " ".join(_fmt(a) for a in ts.theta.flat)
        lines.append(
            f"{_fmt(ts.energy)} {_fmt(ts.rms_gradient)} {_fmt(ts.negative_eigenvalue)} "
            f"{_fmt(ts.second_eigenvalue)} {ts.min_a} {ts.min_b} {int(ts.degenerate)} {angles}")
    with open(ts_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(minima_db: MinimaDatabase, ts_path) -> KineticTransitionNetwork:
    with open(ts_path) as fh:
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
        raise ValueError(f"{ts_path}: missing 'records' header line")
    net = KineticTransitionNetwork(minima=minima_db,
                                   attempts_used=int(header.get("attempts_used", 0)),
                                   budget=int(header.get("budget", 0)))
    n = int(header["records"])
    layers = minima_db.layers
    for ln in raw[body_start:body_start + n]:
        parts = ln.split()
        angles = np.array([float(v) for v in parts[7:]], dtype=np.float64)
        if angles.size != 2 * layers:
            raise ValueError(f"{ts_path}: bad angle count {angles.size}")
        net.transition_states.append(TransitionStateRecord(
            theta=ParameterVector.from_flat(angles),
            energy=float(parts[0]), rms_gradient=float(parts[1]),
            negative_eigenvalue=float(parts[2]), second_eigenvalue=float(parts[3]),
            min_a=int(parts[4]), min_b=int(parts[5]), degenerate=bool(int(parts[6]))))
    return net
