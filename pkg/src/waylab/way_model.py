"""Von Neumann-type measurement models and WAY-type verifiers.

Two frameworks are covered:

* The isometric framework, where ``U: S -> S (x) A`` sends each system basis
  vector ``phi`` to ``phi (x) X`` and ``V: A -> S (x) A`` does the same from
  the apparatus side. The system energy ``H_S`` and the joint energy
  ``H_SA`` are related by ``U H_S = H_SA U``.
* The traditional framework, where ``U`` is only defined on ``S (x) [xi]``
  for a fixed apparatus ready state ``xi``.

Operators that the theory only defines on ``Range U`` are stored as full
matrices on ``S (x) A``. Every condition involving them is right-composed
with ``U`` (or compressed by the range projector), so "commutes on Range U"
means ``||(XY - YX) U||_F`` is small.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from waylab.errors import (
    DegenerateObservableError,
    DimensionMismatchError,
    HypothesisViolation,
    NotIsometryError,
    WaylabError,
)
from waylab.measurement import ProjectiveMeasurement, conservation_defect
from waylab.operators import (
    DEFAULT_TOL,
    MAX_FACTOR_DIM,
    ToleranceConfig,
    as_hermitian,
    as_matrix,
    check_factor_dim,
    cluster_eigenvalues,
    commutator,
    dagger,
    frobenius,
    isometry_defect,
    spectral_decompose,
)
from waylab.verdict import Check, Verdict, logical_check


def _orthonormal_columns(basis: np.ndarray, tol: ToleranceConfig, name: str) -> None:
    defect = isometry_defect(basis)
    if defect > tol.tol_isometry:
        raise NotIsometryError(f"{name} is not orthonormal (||B^dag B - I||_F = {defect:.3g})")


@dataclass(frozen=True, eq=False)
class SystemObservable:
    """An observable ``S = sum_k lambda_k Q_k`` with a basis adapted to its eigenspaces.

    ``basis_blocks[k]`` has the orthonormal vectors ``phi_{k,1..n_k}`` as
    columns; together the blocks form an orthonormal basis of the system space.
    """

    eigenvalues: tuple[float, ...]
    basis_blocks: tuple[np.ndarray, ...]

    @classmethod
    def from_operator(cls, s, tol: ToleranceConfig = DEFAULT_TOL) -> "SystemObservable":
        dec = spectral_decompose(s, tol)
        return cls(dec.eigenvalues, dec.bases)

    @classmethod
    def from_blocks(
        cls, eigenvalues: Sequence[float], basis_blocks: Sequence, tol: ToleranceConfig = DEFAULT_TOL
    ) -> "SystemObservable":
        """Build from explicit eigenvalues and eigenbasis blocks, validating both.

        Raises:
            WaylabError: eigenvalues are not distinct, or the blocks do not
                form an orthonormal basis.
        """
        lams = [float(x) for x in eigenvalues]
        if len(lams) != len(basis_blocks) or not lams:
            raise WaylabError("need one nonempty basis block per eigenvalue")
        if not all(np.isfinite(lams)):
            raise WaylabError("eigenvalues must be finite")
        groups = cluster_eigenvalues(sorted(lams), tol.tol_spectral)
        if len(groups) != len(lams):
            raise WaylabError(f"eigenvalues are not distinct: {lams}")
        blocks = tuple(as_matrix(b, f"basis_blocks[{k}]") for k, b in enumerate(basis_blocks))
        dim = blocks[0].shape[0]
        if any(b.shape[0] != dim for b in blocks):
            raise DimensionMismatchError("basis blocks have different vector lengths")
        full = np.hstack(blocks)
        if full.shape[1] != dim:
            raise WaylabError(f"basis blocks hold {full.shape[1]} vectors for a {dim}-dimensional space")
        _orthonormal_columns(full, tol, "system basis")
        return cls(tuple(lams), blocks)

    @property
    def dim(self) -> int:
        return self.basis_blocks[0].shape[0]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.basis_blocks)

    @property
    def is_nondegenerate(self) -> bool:
        return all(n == 1 for n in self.multiplicities)

    @property
    def basis(self) -> np.ndarray:
        """All ``phi_{k,j}`` as columns, block by block."""
        return np.hstack(self.basis_blocks)

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return tuple(b @ dagger(b) for b in self.basis_blocks)

    def matrix(self) -> np.ndarray:
        return sum(lam * q for lam, q in zip(self.eigenvalues, self.projectors))

    def measurement(self) -> ProjectiveMeasurement:
        return ProjectiveMeasurement(self.projectors)


@dataclass(frozen=True, eq=False)
class ApparatusObservable:
    """``A = sum_k lambda_k P_k`` with basis ``X_{k,j}`` aligned to the system basis.

    ``padding`` spans the apparatus directions not paired with any system
    basis vector (empty when both spaces have the same dimension).
    """

    eigenvalues: tuple[float, ...]
    basis_blocks: tuple[np.ndarray, ...]
    padding: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis_blocks[0].shape[0]

    @property
    def basis(self) -> np.ndarray:
        """Aligned vectors ``X_{k,j}`` as columns (excludes padding)."""
        return np.hstack(self.basis_blocks)

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return tuple(b @ dagger(b) for b in self.basis_blocks)

    def matrix(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors))


@dataclass(frozen=True, eq=False)
class WayModel:
    """System, apparatus, the isometries ``U`` and ``V`` and optional energies.

    Build with :func:`build_way_model`, then attach Hamiltonians with
    :meth:`with_hamiltonians`. Instances are immutable.
    """

    system: SystemObservable
    apparatus: ApparatusObservable
    u: np.ndarray
    v: np.ndarray
    h_s: np.ndarray | None = None
    h_a: np.ndarray | None = None
    h_sa: np.ndarray | None = None

    @property
    def dims(self) -> tuple[int, int]:
        return self.system.dim, self.apparatus.dim

    @property
    def range_projector(self) -> np.ndarray:
        return self.u @ dagger(self.u)

    def with_hamiltonians(self, h_sa=None, h_s=None, h_a=None, tol: ToleranceConfig = DEFAULT_TOL) -> "WayModel":
        """Return a copy with energies set.

        Missing ``h_s`` / ``h_a`` are derived from ``h_sa`` as ``U^dag H U`` and
        ``V^dag H V``; derivation requires ``h_sa`` to hold ``Range U`` invariant.
        """
        n_s, n_a = self.dims
        changes = {}
        if h_sa is not None:
            changes["h_sa"] = _hermitian_of_dim(h_sa, n_s * n_a, tol, "h_sa")
        model = dataclasses.replace(self, **changes)
        if h_s is not None:
            h_s = _hermitian_of_dim(h_s, n_s, tol, "h_s")
        elif model.h_sa is not None:
            h_s = derive_system_hamiltonian(model, tol)
        if h_a is not None:
            h_a = _hermitian_of_dim(h_a, n_a, tol, "h_a")
        elif model.h_sa is not None:
            h_a = derive_apparatus_hamiltonian(model, tol)
        return dataclasses.replace(model, h_s=h_s if h_s is not None else model.h_s,
                                   h_a=h_a if h_a is not None else model.h_a)


def _hermitian_of_dim(h, dim: int, tol: ToleranceConfig, name: str) -> np.ndarray:
    m = as_hermitian(h, tol, name)
    if m.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dimension {m.shape[0]}, expected {dim}")
    return m


def _complement(columns: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span."""
    dim, rank = columns.shape
    if rank == dim:
        return np.zeros((dim, 0), dtype=complex)
    _, _, vh = np.linalg.svd(dagger(columns))
    return dagger(vh[rank:])


def build_way_model(
    system: SystemObservable,
    apparatus_dim: int | None = None,
    apparatus_basis=None,
    tol: ToleranceConfig = DEFAULT_TOL,
    max_dim: int = MAX_FACTOR_DIM,
) -> WayModel:
    """Construct the apparatus observable and the isometries ``U``, ``V``.

    By default the apparatus space has the system's dimension and
    ``X_{k,j}`` is the complex conjugate of ``phi_{k,j}`` read as apparatus
    coordinates, which makes ``U`` independent of eigenvector phases
    (``U e_i = e_i (x) e_i`` when the system basis is the standard one).
    Extra apparatus dimensions are padding: ``V`` sends a padding vector
    ``C`` to ``phi_{first} (x) C`` so that it stays an isometry on all of A.

    Args:
        system: the observable to be measured.
        apparatus_dim: dimension of the apparatus space, at least ``system.dim``.
        apparatus_basis: optional ``(apparatus_dim, system.dim)`` matrix whose
            columns are the aligned ``X`` vectors in system-basis order.
    """
    n = system.dim
    d_a = n if apparatus_dim is None else int(apparatus_dim)
    check_factor_dim(n, max_dim, "system space")
    check_factor_dim(d_a, max_dim, "apparatus space")
    if d_a < n:
        raise DimensionMismatchError(f"apparatus dimension {d_a} is smaller than the {n} system basis vectors")

    phi = system.basis
    if apparatus_basis is None:
        x = np.zeros((d_a, n), dtype=complex)
        x[:n] = np.conj(phi)
    else:
        x = as_matrix(apparatus_basis, "apparatus_basis")
        if x.shape != (d_a, n):
            raise DimensionMismatchError(f"apparatus_basis has shape {x.shape}, expected {(d_a, n)}")
        _orthonormal_columns(x, tol, "apparatus basis")

    splits = np.cumsum(system.multiplicities)[:-1]
    x_blocks = tuple(np.split(x, splits, axis=1))
    padding = _complement(x)

    # U = sum_c (phi_c (x) X_c) phi_c^dag, V = sum_c (phi_c (x) X_c) X_c^dag + padding part
    paired = np.stack([np.kron(phi[:, c], x[:, c]) for c in range(n)], axis=1)
    u = paired @ dagger(phi)
    v = paired @ dagger(x)
    if padding.shape[1]:
        v = v + np.kron(phi[:, :1], padding) @ dagger(padding)

    apparatus = ApparatusObservable(system.eigenvalues, x_blocks, padding)
    return WayModel(system, apparatus, u, v)


def _require(model: WayModel, *names: str) -> None:
    missing = [n for n in names if getattr(model, n) is None]
    if missing:
        raise WaylabError(f"model has unset Hamiltonians: {', '.join(missing)}")


def intertwining_defect(model: WayModel) -> float:
    """``||H_SA U - U H_S||_F``."""
    _require(model, "h_s", "h_sa")
    return frobenius(model.h_sa @ model.u - model.u @ model.h_s)


def apparatus_intertwining_defect(model: WayModel) -> float:
    """``||(H_SA V - V H_A) J||_F`` with ``J`` the aligned apparatus basis."""
    _require(model, "h_a", "h_sa")
    j = model.apparatus.basis
    return frobenius((model.h_sa @ model.v - model.v @ model.h_a) @ j)


def range_invariance_defect(model: WayModel, h_sa=None) -> float:
    """``||(I - R) H_SA R||_F`` with ``R`` the projector onto ``Range U``."""
    h = model.h_sa if h_sa is None else as_matrix(h_sa, "h_sa")
    if h is None:
        raise WaylabError("model has unset Hamiltonians: h_sa")
    r = model.range_projector
    return frobenius((np.eye(r.shape[0]) - r) @ h @ r)


def derive_system_hamiltonian(model: WayModel, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``U^dag H_SA U``, the unique ``H_S`` that ``U`` can intertwine with ``H_SA``.

    Raises:
        HypothesisViolation: ``H_SA`` does not hold ``Range U`` invariant, so
            no system energy is intertwined with it.
    """
    defect = range_invariance_defect(model)
    if defect > tol.tol_defect:
        raise HypothesisViolation("range invariance", defect, tol.tol_defect, "H_SA does not hold Range U invariant")
    h = dagger(model.u) @ model.h_sa @ model.u
    return (h + dagger(h)) / 2


def derive_apparatus_hamiltonian(model: WayModel, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``V^dag H_SA V``; same precondition as :func:`derive_system_hamiltonian`."""
    defect = range_invariance_defect(model)
    if defect > tol.tol_defect:
        raise HypothesisViolation("range invariance", defect, tol.tol_defect, "H_SA does not hold Range U invariant")
    h = dagger(model.v) @ model.h_sa @ model.v
    return (h + dagger(h)) / 2


def _on_range(x: np.ndarray, h: np.ndarray, u: np.ndarray) -> float:
    return frobenius((x @ h - h @ x) @ u)


def _require_intertwining(model: WayModel, tol: ToleranceConfig) -> tuple[float, float]:
    sys_defect = intertwining_defect(model)
    if sys_defect > tol.tol_defect:
        raise HypothesisViolation("U H_S = H_SA U", sys_defect, tol.tol_defect)
    app_defect = apparatus_intertwining_defect(model)
    if app_defect > tol.tol_defect:
        raise HypothesisViolation("V H_A = H_SA V", app_defect, tol.tol_defect)
    return sys_defect, app_defect


def proposition1_check(model: WayModel, tol: ToleranceConfig = DEFAULT_TOL) -> Verdict:
    """Evaluate the six equivalent conservation conditions and check they agree.

    The conditions are: ``[H_S, S]``, ``[H_S, Q_k]`` for all k,
    ``[U S U^dag, H_SA]`` on Range U, ``[U Q_k U^dag, H_SA]`` on Range U,
    ``[H_A, A]`` and ``[H_A, P_k]`` (apparatus conditions compressed to the
    aligned subspace). The verdict passes iff all six hold or none does;
    ``facts["all_hold"]`` says which.

    Raises:
        HypothesisViolation: ``U`` (or ``V``) does not intertwine the energies.
    """
    _require(model, "h_s", "h_a", "h_sa")
    sys_defect, app_defect = _require_intertwining(model, tol)
    u, h = model.u, model.h_sa
    s = model.system.matrix()
    a = model.apparatus.matrix()
    j = model.apparatus.basis
    qs = model.system.projectors
    ps = model.apparatus.projectors
    usu = u @ s @ dagger(u)

    defects = {
        "i": frobenius(commutator(model.h_s, s)),
        "i'": max(frobenius(commutator(model.h_s, q)) for q in qs),
        "ii": _on_range(usu, h, u),
        "ii'": max(_on_range(u @ q @ dagger(u), h, u) for q in qs),
        "iii": frobenius(commutator(model.h_a, a) @ j),
        "iii'": max(frobenius(commutator(model.h_a, p) @ j) for p in ps),
    }
    holds = {name: d <= tol.tol_defect for name, d in defects.items()}
    all_hold = all(holds.values())
    none_hold = not any(holds.values())
    descriptions = {
        "i": "[H_S, S]",
        "i'": "max_k [H_S, Q_k]",
        "ii": "[U S U^dag, H_SA] U",
        "ii'": "max_k [U Q_k U^dag, H_SA] U",
        "iii": "[H_A, A] on aligned apparatus subspace",
        "iii'": "max_k [H_A, P_k] on aligned apparatus subspace",
    }
    witnesses = ()
    if not all_hold:
        witnesses = (("system_commutator", commutator(model.h_s, s)),)
    return Verdict(
        (logical_check("equivalence", all_hold or none_hold, "all six conditions hold or all fail"),),
        facts={
            "all_hold": all_hold,
            "conditions": {name: {"defect": defects[name], "holds": holds[name], "description": descriptions[name]}
                           for name in defects},
            "intertwining_defect": sys_defect,
            "apparatus_intertwining_defect": app_defect,
            "threshold": tol.tol_defect,
        },
        witnesses=witnesses,
    )


FORMS = ("additive", "weighted", "conjugated")


@dataclass(frozen=True, eq=False)
class AdditiveHamiltonian:
    """Joint energy in one of three structured forms.

    * ``additive``:   ``H1 (x) I + I (x) H2``
    * ``weighted``:   ``H1 (x) D2 + D1 (x) H2`` with ``D1``, ``D2`` diagonal
      with respect to the system and apparatus spectral projectors
    * ``conjugated``: ``D1 (x) (V^dag U) D1 (V^dag U)^dag``

    The weighted and conjugated forms are only supported for
    non-degenerate system observables.
    """

    form: str
    h1: np.ndarray | None = None
    h2: np.ndarray | None = None
    d1: np.ndarray | None = None
    d2: np.ndarray | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise WaylabError(f"unknown form {self.form!r}; expected one of {FORMS}")
        needed = {"additive": ("h1", "h2"), "weighted": ("h1", "h2", "d1", "d2"), "conjugated": ("d1",)}[self.form]
        for name in needed:
            if getattr(self, name) is None:
                raise WaylabError(f"form {self.form!r} needs {name}")
        for name in ("h1", "h2", "d1", "d2"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, as_hermitian(value, DEFAULT_TOL, name))


def _block_diagonal_defect(d: np.ndarray, projectors: Sequence[np.ndarray]) -> float:
    return max(frobenius(commutator(d, p)) for p in projectors)


def build_additive(h: AdditiveHamiltonian, model: WayModel, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Realize the joint energy matrix on ``S (x) A``.

    Raises:
        DegenerateObservableError: weighted/conjugated form with a degenerate
            system observable.
        WaylabError: ``D1``/``D2`` not diagonal with respect to the spectral
            projectors.
    """
    n_s, n_a = model.dims

    def sized(m, dim, name):
        if m.shape[0] != dim:
            raise DimensionMismatchError(f"{name} has dimension {m.shape[0]}, expected {dim}")
        return m

    if h.form == "additive":
        return np.kron(sized(h.h1, n_s, "h1"), np.eye(n_a)) + np.kron(np.eye(n_s), sized(h.h2, n_a, "h2"))

    if not model.system.is_nondegenerate:
        raise DegenerateObservableError(f"the {h.form} form is only defined for non-degenerate system observables")
    d1 = sized(h.d1, n_s, "d1")
    if _block_diagonal_defect(d1, model.system.projectors) > tol.tol_defect:
        raise WaylabError("d1 is not diagonal with respect to the system spectral projectors")
    if h.form == "weighted":
        d2 = sized(h.d2, n_a, "d2")
        if _block_diagonal_defect(d2, model.apparatus.projectors) > tol.tol_defect:
            raise WaylabError("d2 is not diagonal with respect to the apparatus spectral projectors")
        return np.kron(sized(h.h1, n_s, "h1"), d2) + np.kron(d1, sized(h.h2, n_a, "h2"))
    t = dagger(model.v) @ model.u
    return np.kron(d1, t @ d1 @ dagger(t))


def _nonsingular_on_aligned(d: np.ndarray, basis: np.ndarray, tol: ToleranceConfig) -> bool:
    diag = np.einsum("ic,ij,jc->c", np.conj(basis), d, basis)
    return bool(np.all(np.abs(diag) > tol.tol_defect))


def _spectrum_gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(a) - np.linalg.eigvalsh(b))))


def theorem2_verify(model: WayModel, h: AdditiveHamiltonian, tol: ToleranceConfig = DEFAULT_TOL) -> Verdict:
    """Verify the WAY-type conclusions for a structured joint energy.

    Hypothesis: the realized ``H_SA`` holds ``Range U`` invariant, so
    ``H_S = U^dag H_SA U`` is intertwined with it (and ``H_A = V^dag H_SA V``
    likewise). Conclusions for the additive form: ``S`` commutes with
    ``H_S`` and ``H1``; ``A`` commutes with ``H_A`` and ``H2`` (the Yanase
    condition). Degenerate observables are handled through the eigenspace
    blocks of the system basis.

    For the weighted form the ``H1`` (``H2``) conclusion is asserted only
    when ``D2`` (``D1``) has no zero diagonal entry; otherwise ``H1`` is not
    constrained and the check is recorded as not applicable. For the
    conjugated form the conclusions concern ``D1`` and its apparatus copy.

    Raises:
        HypothesisViolation: the range-invariance hypothesis fails. No
            conclusion is asserted in that case.
    """
    h_sa = build_additive(h, model, tol)
    invariance = range_invariance_defect(model, h_sa)
    if invariance > tol.tol_defect:
        raise HypothesisViolation("range invariance", invariance, tol.tol_defect,
                                  "H_SA U = U H_S has no solution H_S")
    model = model.with_hamiltonians(h_sa=h_sa, tol=tol)
    s = model.system.matrix()
    a = model.apparatus.matrix()
    j = model.apparatus.basis

    checks = [
        Check("[S,H_S]", frobenius(commutator(s, model.h_s)), tol.tol_defect, "system observable vs system energy"),
        Check("[A,H_A]", frobenius(commutator(a, model.h_a)), tol.tol_defect, "apparatus observable vs apparatus energy"),
    ]
    not_applicable = []
    if h.form == "additive":
        checks.append(Check("[S,H1]", frobenius(commutator(s, h.h1)), tol.tol_defect, "system observable vs H1"))
        checks.append(Check("[A,H2]", frobenius(commutator(a, h.h2)), tol.tol_defect, "Yanase condition"))
    elif h.form == "weighted":
        if _nonsingular_on_aligned(h.d2, j, tol):
            checks.append(Check("[S,H1]", frobenius(commutator(s, h.h1)), tol.tol_defect, "system observable vs H1"))
        else:
            not_applicable.append("[S,H1]")
        if _nonsingular_on_aligned(h.d1, model.system.basis, tol):
            checks.append(Check("[A,H2]", frobenius(commutator(a, h.h2)), tol.tol_defect, "Yanase condition"))
        else:
            not_applicable.append("[A,H2]")
    else:
        t = dagger(model.v) @ model.u
        checks.append(Check("[S,D1]", frobenius(commutator(s, h.d1)), tol.tol_defect, "system observable vs D1"))
        checks.append(Check("[A,D1']", frobenius(commutator(a, t @ h.d1 @ dagger(t))), tol.tol_defect,
                            "apparatus observable vs transported D1"))

    # U and V both map onto Range U, so H_S, H_A|aligned and H_SA|Range U share a spectrum.
    h_a_aligned = dagger(j) @ model.h_a @ j
    checks.append(Check("spectral equivalence", _spectrum_gap(model.h_s, h_a_aligned), tol.tol_defect,
                        "spectra of H_S and H_A on the aligned subspace agree"))

    witnesses = tuple((c.name, commutator(s, model.h_s)) for c in checks if not c.passed and c.name == "[S,H_S]")
    return Verdict(
        tuple(checks),
        facts={
            "form": h.form,
            "range_invariance_defect": invariance,
            "intertwining_defect": intertwining_defect(model),
            "h_s_spectrum": np.linalg.eigvalsh(model.h_s).tolist(),
            "not_applicable": not_applicable,
            "degenerate": not model.system.is_nondegenerate,
        },
        witnesses=witnesses,
    )


@dataclass(frozen=True, eq=False)
class TraditionalSetup:
    """The traditional model with apparatus ready state ``xi``.

    ``w`` is the embedding ``phi -> phi (x) xi`` and ``u_trad`` is the
    partial isometry on ``S (x) A`` with ``u_trad (phi_i (x) xi) = phi_i (x) X_i``,
    zero on the orthogonal complement of ``S (x) [xi]``. ``h_sprime`` is the
    joint energy restricted to ``S (x) [xi]`` written in system coordinates
    (``W^dag H W``) and ``s_prime`` is ``W S W^dag``.
    """

    model: WayModel
    xi: np.ndarray
    w: np.ndarray
    u_trad: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h: np.ndarray
    a_scalar: float
    h_sprime: np.ndarray
    s_prime: np.ndarray


def build_traditional(
    system: SystemObservable,
    xi,
    h1,
    h2,
    tol: ToleranceConfig = DEFAULT_TOL,
    apparatus_basis=None,
) -> tuple[TraditionalSetup, Verdict]:
    """Build the traditional setup and check that ``H2 xi = a xi``.

    ``a`` is estimated as ``<xi, H2 xi>``. The verdict also checks that the
    restricted energy differs from ``H1`` by exactly ``a I``.

    Raises:
        DegenerateObservableError: the system observable is degenerate.
        HypothesisViolation: ``xi`` is not an eigenvector of ``H2``, so the
            joint energy leaves ``S (x) [xi]`` and ``UH = HU`` is undefined.
    """
    if not system.is_nondegenerate:
        raise DegenerateObservableError("the traditional setup is only implemented for non-degenerate observables")
    n = system.dim
    h1 = _hermitian_of_dim(h1, n, tol, "h1")
    h2 = as_hermitian(h2, tol, "h2")
    if h2.shape[0] != n:
        raise DimensionMismatchError(f"h2 has dimension {h2.shape[0]}; the apparatus must match the system ({n})")
    xi = as_matrix(xi, "xi").reshape(-1)
    if xi.shape[0] != n:
        raise DimensionMismatchError(f"xi has length {xi.shape[0]}, expected {n}")
    norm = float(np.linalg.norm(xi))
    if abs(norm - 1.0) > tol.tol_isometry:
        raise WaylabError(f"xi must be a unit vector, has norm {norm!r}")

    a_scalar = float(np.vdot(xi, h2 @ xi).real)
    domain_defect = float(np.linalg.norm(h2 @ xi - a_scalar * xi))
    if domain_defect > tol.tol_defect:
        raise HypothesisViolation("domain condition H2 xi = a xi", domain_defect, tol.tol_defect,
                                  "H maps S (x) [xi] outside the domain of U, so UH = HU is undefined")

    model = build_way_model(system, n, apparatus_basis, tol)
    w = np.kron(np.eye(n), xi.reshape(-1, 1))
    u_trad = model.u @ dagger(w)
    h = np.kron(h1, np.eye(n)) + np.kron(np.eye(n), h2)
    h_sprime = dagger(w) @ h @ w
    s_prime = w @ system.matrix() @ dagger(w)
    setup = TraditionalSetup(model, xi, w, u_trad, h1, h2, h, a_scalar, h_sprime, s_prime)

    offset = h_sprime - h1 - a_scalar * np.eye(n)
    verdict = Verdict(
        (
            Check("domain condition", domain_defect, tol.tol_defect, "||H2 xi - a xi||"),
            Check("energy offset", frobenius(offset), tol.tol_defect, "H|S' - W H1 W^dag = a I"),
        ),
        facts={"a": a_scalar},
    )
    return setup, verdict


def theorem3_verify(setup: TraditionalSetup, tol: ToleranceConfig = DEFAULT_TOL) -> Verdict:
    """Verify the traditional WAY conclusions, including ``H2 = a I``.

    Hypothesis: ``H U (phi_i (x) xi) = U H (phi_i (x) xi)`` for all i.
    Conclusions: ``[H1, S] = 0`` with ``H1 phi_i = d_i phi_i``; the
    measurement ``{P_phi_i}`` conserves ``H1``; ``H2 = a I``; and the spectra
    of ``H|S'`` and ``H|Range U`` coincide (both are ``{d_i + a}``).

    Raises:
        HypothesisViolation: the commutation hypothesis fails.
    """
    h, u_trad, w = setup.h, setup.u_trad, setup.w
    hyp = frobenius(h @ u_trad @ w - u_trad @ h @ w)
    if hyp > tol.tol_defect:
        raise HypothesisViolation("HU = UH on S (x) [xi]", hyp, tol.tol_defect)
    system = setup.model.system
    n = system.dim
    s = system.matrix()
    phi = system.basis
    d = np.einsum("ic,ij,jc->c", np.conj(phi), setup.h1, phi).real
    _, cons = conservation_defect(system.measurement(), setup.h1)
    u = setup.model.u
    h_range = dagger(u) @ h @ u
    spec_sprime = np.linalg.eigvalsh(setup.h_sprime)
    spec_range = np.linalg.eigvalsh((h_range + dagger(h_range)) / 2)
    checks = (
        Check("[H1,S]", frobenius(commutator(setup.h1, s)), tol.tol_defect, "H1 phi_i = d_i phi_i"),
        Check("conservation", cons, tol.tol_defect, "{P_phi_i} conserves H1"),
        Check("H2 = aI", frobenius(setup.h2 - setup.a_scalar * np.eye(n)), tol.tol_defect, "||H2 - a I||_F"),
        Check("spectra", float(np.max(np.abs(spec_sprime - spec_range))), tol.tol_defect,
              "spec H|S' equals spec H|Range U"),
    )
    witnesses = ()
    if frobenius(setup.h2 - setup.a_scalar * np.eye(n)) > tol.tol_defect:
        witnesses = (("h2_minus_aI", setup.h2 - setup.a_scalar * np.eye(n)),)
    return Verdict(
        checks,
        facts={
            "hypothesis_defect": hyp,
            "s_eigenvalues": list(system.eigenvalues),
            "d": d.tolist(),
            "a": setup.a_scalar,
            "spectrum_restricted": spec_sprime.tolist(),
            "spectrum_range_u": spec_range.tolist(),
        },
        witnesses=witnesses,
    )
