"""Random instance generators and the conserving-but-noncommuting search.

For projective measurements, conserving an observable ``H`` is the same as
commuting with it. Whether that holds for general Kraus measurements is the
question :func:`search_counterexample` gathers evidence on. It only reports
candidates; it never certifies a counterexample.

All randomness goes through ``numpy.random.default_rng(seed)`` so results are
reproducible per seed.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from waylab.errors import WaylabError
from waylab.measurement import (
    KrausMeasurement,
    ProjectiveMeasurement,
    commutation_defect,
    conservation_defect,
    theorem1_check,
)
from waylab.operators import DEFAULT_TOL, ToleranceConfig, as_hermitian, dagger, frobenius

CONSERVING_COMMUTING = "conserving-and-commuting"
CANDIDATE = "conserving-noncommuting-candidate"
NONCONVERGED = "nonconverged"


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    """Standard complex Gaussian entries (``E|z|^2 = 1``)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hermitian(dim: int, seed=None) -> np.ndarray:
    """``(G + G^dag) / 2`` for a standard complex Gaussian ``G``."""
    if dim < 1:
        raise WaylabError("dim must be positive")
    g = complex_gaussian((dim, dim), _rng(seed))
    return (g + dagger(g)) / 2


def orthonormalize(g: np.ndarray) -> np.ndarray:
    """QR orthonormalization with the phase of ``R``'s diagonal removed.

    Fixing the phases makes the map continuous in ``g`` and, for Gaussian
    ``g``, Haar distributed.
    """
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    d = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * d


def polar_retract(g: np.ndarray) -> np.ndarray:
    """Closest isometry to ``g`` in Frobenius norm (the polar factor)."""
    w, _, vh = np.linalg.svd(g, full_matrices=False)
    return w @ vh


def random_unitary(dim: int, seed=None) -> np.ndarray:
    return orthonormalize(complex_gaussian((dim, dim), _rng(seed)))


def random_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    return orthonormalize(complex_gaussian((rows, cols), _rng(seed)))


def kraus_from_isometry(v: np.ndarray, n_outcomes: int) -> KrausMeasurement:
    """Slice a stacked ``(n * dim, dim)`` isometry into ``n`` Kraus operators."""
    dim = v.shape[1]
    return KrausMeasurement([v[i * dim:(i + 1) * dim] for i in range(n_outcomes)])


def stack_kraus(m: KrausMeasurement) -> np.ndarray:
    return np.vstack(m.operators)


def random_kraus(dim: int, n_outcomes: int, seed=None) -> KrausMeasurement:
    """Kraus operators read off the row blocks of a random isometry ``C^dim -> C^(n*dim)``."""
    return kraus_from_isometry(random_isometry(n_outcomes * dim, dim, seed), n_outcomes)


def random_density_matrix(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    g = complex_gaussian((dim, rank or dim), _rng(seed))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_pure_state(dim: int, seed=None) -> np.ndarray:
    return random_density_matrix(dim, seed, rank=1)


def random_rank_pattern(dim: int, rng: np.random.Generator, min_parts: int = 1) -> list[int]:
    """A random composition of ``dim`` into at least ``min_parts`` positive ranks."""
    parts = int(rng.integers(min_parts, dim + 1))
    cuts = np.sort(rng.choice(np.arange(1, dim), size=parts - 1, replace=False)) if parts > 1 else []
    edges = [0, *cuts, dim]
    return [int(b - a) for a, b in zip(edges[:-1], edges[1:])]


def coordinate_resolution(ranks: Sequence[int]) -> list[np.ndarray]:
    dim = sum(ranks)
    out, start = [], 0
    for r in ranks:
        p = np.zeros((dim, dim), dtype=complex)
        p[start:start + r, start:start + r] = np.eye(r)
        out.append(p)
        start += r
    return out


def random_projective(dim: int, seed=None) -> ProjectiveMeasurement:
    """A coordinate resolution with a random rank pattern, rotated by a random unitary."""
    rng = _rng(seed)
    ranks = random_rank_pattern(dim, rng)
    w = random_unitary(dim, rng)
    return ProjectiveMeasurement([w @ p @ dagger(w) for p in coordinate_resolution(ranks)])


def random_commuting_pair(dim: int, seed=None) -> tuple[ProjectiveMeasurement, np.ndarray]:
    """A projective measurement and a Hermitian ``H`` that is block diagonal in its frame."""
    rng = _rng(seed)
    ranks = random_rank_pattern(dim, rng)
    w = random_unitary(dim, rng)
    h = np.zeros((dim, dim), dtype=complex)
    start = 0
    for r in ranks:
        h[start:start + r, start:start + r] = random_hermitian(r, rng)
        start += r
    projectors = [w @ p @ dagger(w) for p in coordinate_resolution(ranks)]
    return ProjectiveMeasurement(projectors), w @ h @ dagger(w)


def random_commuting_kraus(dim: int, n_outcomes: int, seed=None) -> tuple[KrausMeasurement, np.ndarray]:
    """Kraus operators that are functions of a random ``H`` (hence commute with it)."""
    rng = _rng(seed)
    w = random_unitary(dim, rng)
    energies = rng.standard_normal(dim)
    weights = np.abs(complex_gaussian((n_outcomes, dim), rng))
    weights /= np.linalg.norm(weights, axis=0)
    phases = np.exp(2j * np.pi * rng.random((n_outcomes, dim)))
    ops = [w @ np.diag(weights[i] * phases[i]) @ dagger(w) for i in range(n_outcomes)]
    return KrausMeasurement(ops), w @ np.diag(energies) @ dagger(w)


# --- search ---------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Settings for :func:`search_counterexample`.

    The step size starts at ``initial_step`` and is multiplied by
    ``step_growth`` after an accepted step and by ``step_shrink`` after a
    rejected one; the run stops early once it falls below ``min_step``.
    """

    dim: int
    n_outcomes: int
    seed: int
    max_iters: int = 500
    initial_step: float = 0.1
    step_growth: float = 1.5
    step_shrink: float = 0.5
    min_step: float = 1e-14
    target_conservation_defect: float = 1e-8
    commutator_objective_weight: float = 0.1
    commutator_cap: float = 1.0

    def __post_init__(self):
        if self.dim < 2 or self.n_outcomes < 2:
            raise WaylabError("search needs dim >= 2 and n_outcomes >= 2")
        if not 0 <= self.seed < 2**64:
            raise WaylabError("seed must be a 64-bit unsigned integer")
        if self.max_iters < 1:
            raise WaylabError("max_iters must be positive")
        for name in ("target_conservation_defect", "commutator_objective_weight", "commutator_cap", "initial_step"):
            if not getattr(self, name) > 0:
                raise WaylabError(f"{name} must be positive")
        if not (self.step_growth >= 1 and 0 < self.step_shrink < 1):
            raise WaylabError("step schedule needs step_growth >= 1 and 0 < step_shrink < 1")


@dataclass(frozen=True, eq=False)
class SearchReport:
    best_measurement: KrausMeasurement
    conservation_defect: float
    commutation_defect: float
    initial_conservation_defect: float
    iterations: int
    accepted_steps: int
    classification: str
    reverified: bool
    config: SearchConfig
    history: tuple[float, ...] = field(default=(), repr=False)


def _objective_parts(v: np.ndarray, h: np.ndarray, n: int):
    dim = h.shape[0]
    blocks = v.reshape(n, dim, dim)
    d = sum(dagger(b) @ h @ b for b in blocks) - h
    comms = [b @ h - h @ b for b in blocks]
    norms = [frobenius(c) for c in comms]
    k = int(np.argmax(norms))
    return blocks, d, comms[k], norms[k], k


def _objective(v, h, n, weight, cap) -> tuple[float, float, float]:
    _, d, _, comm, _ = _objective_parts(v, h, n)
    cons = frobenius(d)
    return cons**2 - weight * min(comm, cap), cons, comm


def _gradient(v, h, n, weight, cap, include_commutator: bool = True) -> np.ndarray:
    # Real gradient G with d(objective) = Re tr(G^dag dV); D and H are Hermitian.
    dim = h.shape[0]
    blocks, d, c, comm, k = _objective_parts(v, h, n)
    grad = np.concatenate([4 * h @ b @ d for b in blocks], axis=0)
    if include_commutator and 0 < comm < cap:
        grad[k * dim:(k + 1) * dim] -= weight * (c @ h - h @ c) / comm
    # Project onto the tangent space of the isometries at v.
    vg = dagger(v) @ grad
    return grad - v @ (vg + dagger(vg)) / 2


def _descend(v, h, n, config: SearchConfig, weight: float, max_iters: int):
    """Projected gradient descent with monotone acceptance.

    A step is kept only if it lowers the objective and does not raise the
    conservation defect.
    """
    cap = config.commutator_cap
    step = config.initial_step
    obj, cons, _ = _objective(v, h, n, weight, cap)
    history = [cons]
    iters = accepted = 0
    while iters < max_iters and cons > 0.0 and step >= config.min_step:
        grad = _gradient(v, h, n, weight, cap, include_commutator=weight > 0)
        gnorm = frobenius(grad)
        if gnorm == 0.0:
            break
        iters += 1
        trial = polar_retract(v - step * grad / gnorm)
        t_obj, t_cons, _ = _objective(trial, h, n, weight, cap)
        if t_obj < obj and t_cons <= cons:
            v, obj, cons = trial, t_obj, t_cons
            accepted += 1
            step *= config.step_growth
        else:
            step *= config.step_shrink
        history.append(cons)
    return v, iters, accepted, history


def _conservation_jacobian(v: np.ndarray, h: np.ndarray, n: int) -> np.ndarray:
    """Real Jacobian of ``D(V)`` restricted to the tangent space at ``v``.

    Columns follow the real coordinates ``(Re V, Im V)``; rows follow
    ``(Re D, Im D)``. Directions normal to the isometries are projected out,
    so they map to zero.
    """
    hv = np.kron(np.eye(n), h) @ v
    size = v.size
    units = np.concatenate([np.eye(size), 1j * np.eye(size)]).reshape(2 * size, *v.shape)
    ve = dagger(v) @ units
    e = units - v @ (ve + dagger(ve)) / 2
    dd = dagger(e) @ hv + dagger(hv) @ e
    flat = dd.reshape(2 * size, -1)
    return np.concatenate([flat.real, flat.imag], axis=1).T


def _to_real(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _from_real(x: np.ndarray, shape) -> np.ndarray:
    half = x.size // 2
    return (x[:half] + 1j * x[half:]).reshape(shape)


def _converge(v, h, n, max_iters: int):
    """Levenberg-Marquardt on the conservation residual, accepting only decreases."""
    _, d, _, _, _ = _objective_parts(v, h, n)
    cons = frobenius(d)
    history = [cons]
    damping = 1e-3
    iters = accepted = 0
    while iters < max_iters and cons > 0.0 and damping < 1e12:
        iters += 1
        jac = _conservation_jacobian(v, h, n)
        lhs = jac.T @ jac
        rhs = -jac.T @ _to_real(d)
        scale = max(float(np.max(np.diag(lhs))), 1e-300)
        delta = np.linalg.solve(lhs + damping * scale * np.eye(lhs.shape[0]), rhs)
        trial = polar_retract(v + _from_real(delta, v.shape))
        _, t_d, _, _, _ = _objective_parts(trial, h, n)
        t_cons = frobenius(t_d)
        if t_cons < cons:
            v, d, cons = trial, t_d, t_cons
            accepted += 1
            damping = max(damping / 3, 1e-12)
        else:
            damping *= 4
        history.append(cons)
    return v, iters, accepted, history


def search_counterexample(h, config: SearchConfig, initial: KrausMeasurement | None = None,
                          tol: ToleranceConfig = DEFAULT_TOL) -> SearchReport:
    """Look for a Kraus measurement that conserves ``h`` without commuting with it.

    The start point is ``initial`` or ``random_kraus(dim, n_outcomes, seed)``.
    The family is parameterized by its stacked isometry and re-orthonormalized
    after every step, so completeness holds throughout. Two phases run for
    up to ``max_iters`` steps each: projected gradient descent on
    ``cons^2 - w * min(comm, cap)`` (``cons``/``comm`` being the conservation
    and commutation defects) to explore, then damped Gauss-Newton steps on
    the conservation residual alone to converge. Neither phase ever accepts a
    step that raises ``cons``.

    Classification:

    * ``conserving-noncommuting-candidate``: ``cons <= target`` and
      ``comm >= 100 * target``, and still so after a re-verification pass
      that must bring ``cons`` below ``target / 100``;
    * ``conserving-and-commuting``: ``cons <= target`` otherwise;
    * ``nonconverged``: everything else, including candidates that fail
      re-verification.

    Raises:
        WaylabError: ``h`` is a multiple of the identity (every measurement
            conserves it) or its size does not match ``config.dim``.
    """
    hm = as_hermitian(h, tol, "h")
    if hm.shape[0] != config.dim:
        raise WaylabError(f"h has dimension {hm.shape[0]}, config.dim is {config.dim}")
    scalar = np.trace(hm).real / config.dim
    if frobenius(hm - scalar * np.eye(config.dim)) <= tol.tol_defect:
        raise WaylabError("h is a multiple of the identity; every measurement conserves it")

    n = config.n_outcomes
    if initial is None:
        start = random_kraus(config.dim, n, config.seed)
    else:
        if len(initial) != n or initial.dim != config.dim:
            raise WaylabError("initial measurement does not match config dim / n_outcomes")
        start = initial
    v = stack_kraus(start)
    _, cons0 = conservation_defect(start, hm)

    v, iters, accepted, history = _descend(v, hm, n, config, config.commutator_objective_weight, config.max_iters)
    v, i, a, hist = _converge(v, hm, n, config.max_iters)
    iters, accepted, history = iters + i, accepted + a, history + hist[1:]

    m = kraus_from_isometry(v, n)
    _, cons = conservation_defect(m, hm)
    comm = commutation_defect(m, hm)
    target = config.target_conservation_defect

    reverified = False
    if cons <= target and comm >= 100 * target:
        v, i, a, hist = _converge(v, hm, n, config.max_iters)
        iters, accepted, history = iters + i, accepted + a, history + hist[1:]
        m = kraus_from_isometry(v, n)
        _, cons = conservation_defect(m, hm)
        comm = commutation_defect(m, hm)
        reverified = cons <= target / 100 and comm >= 100 * target
        classification = CANDIDATE if reverified else NONCONVERGED
    elif cons <= target:
        classification = CONSERVING_COMMUTING
    else:
        classification = NONCONVERGED

    return SearchReport(
        best_measurement=m,
        conservation_defect=cons,
        commutation_defect=comm,
        initial_conservation_defect=cons0,
        iterations=iters,
        accepted_steps=accepted,
        classification=classification,
        reverified=reverified,
        config=config,
        history=tuple(history),
    )


def _search_one(args):
    return search_counterexample(*args)


def search_many(h, configs: Sequence[SearchConfig], workers: int = 1, initial: KrausMeasurement | None = None,
                tol: ToleranceConfig = DEFAULT_TOL) -> list[SearchReport]:
    """Run independent searches, optionally in worker processes; output follows ``configs`` order."""
    jobs = [(np.asarray(h), c, initial, tol) for c in configs]
    if workers <= 1:
        return [_search_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_search_one, jobs))


def qutrit_conserving_example() -> tuple[KrausMeasurement, np.ndarray]:
    """A two-outcome qutrit measurement that conserves ``diag(1, 0, -1)`` without commuting with it.

    ``M0`` keeps the top and bottom levels; ``M1`` sends the middle level to
    an equal superposition of top and bottom, so the mean energy is preserved.
    """
    h = np.diag([1.0, 0.0, -1.0]).astype(complex)
    m0 = np.diag([1.0, 0.0, 1.0]).astype(complex)
    m1 = np.zeros((3, 3), dtype=complex)
    m1[0, 1] = m1[2, 1] = 1 / np.sqrt(2)
    return KrausMeasurement([m0, m1]), h


# --- theorem 1 sweep --------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    dim: int
    trials: int
    engineered: int
    conserving: int
    nonconserving: int
    violations: int
    max_conservation_defect_conserving: float
    max_commutation_defect_conserving: float
    min_conservation_defect_nonconserving: float
    min_commutation_defect_nonconserving: float


def sweep_theorem1(
    dims: Iterable[int],
    trials: int,
    seed: int,
    engineered: int = 0,
    extra_pairs: Sequence[tuple[ProjectiveMeasurement, np.ndarray]] = (),
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[SweepRow]:
    """Run the projective conservation/commutation check on random pairs.

    For each dimension: ``trials`` random (projective measurement, Hermitian
    ``H``) pairs plus ``engineered`` commuting pairs, plus any ``extra_pairs``
    of matching dimension. Returns one row per dimension; ``trials == 0``
    with nothing engineered gives an empty table.
    """
    rows = []
    rng = np.random.default_rng(seed)
    for dim in dims:
        if dim < 2:
            raise WaylabError("sweep dimensions must be >= 2")
        pairs = [(random_projective(dim, rng), random_hermitian(dim, rng)) for _ in range(trials)]
        pairs += [random_commuting_pair(dim, rng) for _ in range(engineered)]
        pairs += [(p, h) for p, h in extra_pairs if p.dim == dim]
        if not pairs:
            continue
        cons_in, comm_in, cons_out, comm_out = [], [], [], []
        violations = 0
        for p, h in pairs:
            verdict = theorem1_check(p, h, tol)
            if not verdict.passed:
                violations += 1
            f = verdict.facts
            if f["conserves"]:
                cons_in.append(f["conservation_defect"])
                comm_in.append(f["commutation_defect"])
            else:
                cons_out.append(f["conservation_defect"])
                comm_out.append(f["commutation_defect"])
        rows.append(SweepRow(
            dim=dim,
            trials=trials,
            engineered=len(pairs) - trials,
            conserving=len(cons_in),
            nonconserving=len(cons_out),
            violations=violations,
            max_conservation_defect_conserving=max(cons_in, default=float("nan")),
            max_commutation_defect_conserving=max(comm_in, default=float("nan")),
            min_conservation_defect_nonconserving=min(cons_out, default=float("nan")),
            min_commutation_defect_nonconserving=min(comm_out, default=float("nan")),
        ))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    names = list(SweepRow.__dataclass_fields__)
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row))
    return buf.getvalue()
