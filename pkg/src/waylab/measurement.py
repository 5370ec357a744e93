"""Measurement semantics and the conservation/commutation criteria.

A measurement is a finite family of Kraus operators ``M_i`` with
``sum_i M_i^dag M_i = I``. It conserves an observable ``H`` (for every input
state) iff ``sum_i M_i^dag H M_i = H``. For projective measurements that is
equivalent to every projector commuting with ``H``; for general Kraus
families only the commuting-implies-conserving direction is automatic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from waylab.errors import DimensionMismatchError, InvalidMeasurementError, InvalidStateError, NotHermitianError
from waylab.operators import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_square,
    commutator,
    dagger,
    frobenius,
    hermitian_defect,
    is_orthogonal_resolution,
)
from waylab.verdict import Check, Verdict, logical_check


@dataclass(frozen=True, init=False, eq=False)
class KrausMeasurement:
    """A finite family of square measurement operators of equal size.

    Construction only checks shapes; completeness is checked by
    :func:`validate` so that incomplete families can still be inspected.
    """

    operators: tuple[np.ndarray, ...]

    kind = "kraus"

    def __init__(self, operators: Sequence):
        mats = tuple(as_square(m, f"operators[{i}]") for i, m in enumerate(operators))
        if not mats:
            raise InvalidMeasurementError("a measurement needs at least one operator")
        for i, m in enumerate(mats):
            if m.shape != mats[0].shape:
                raise DimensionMismatchError(
                    f"ragged measurement: operators[{i}] has shape {m.shape}, expected {mats[0].shape}"
                )
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "operators", mats)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


class ProjectiveMeasurement(KrausMeasurement):
    """Kraus measurement whose operators are orthogonal projectors.

    Use :meth:`is_valid` (or :func:`theorem1_check`, which enforces it) to
    confirm the projectors form an orthogonal resolution of the identity.
    """

    kind = "projective"

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return self.operators

    def is_valid(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        return is_orthogonal_resolution(self.operators, tol)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Outcome probabilities with the aligned post-measurement states.

    ``conditional_states[i]`` is ``None`` where ``probabilities[i]`` is below
    ``tol_defect``; those outcomes are not normalized.
    """

    probabilities: np.ndarray
    conditional_states: tuple[np.ndarray | None, ...]


def _check_dims(m: KrausMeasurement, a: np.ndarray, name: str) -> None:
    if a.shape != (m.dim, m.dim):
        raise DimensionMismatchError(f"{name} has shape {a.shape}, measurement acts on dimension {m.dim}")


def completeness_defect(m: KrausMeasurement) -> float:
    """``||sum_i M_i^dag M_i - I||_F``."""
    total = sum(dagger(op) @ op for op in m.operators)
    return frobenius(total - np.eye(m.dim))


def validate(m: KrausMeasurement, tol: ToleranceConfig = DEFAULT_TOL) -> Verdict:
    defect = completeness_defect(m)
    witnesses = ()
    if defect > tol.tol_projector:
        witnesses = (("completeness_residual", sum(dagger(op) @ op for op in m.operators) - np.eye(m.dim)),)
    return Verdict(
        (Check("completeness", defect, tol.tol_projector, "||sum M_i^dag M_i - I||_F"),),
        facts={"kind": m.kind, "outcomes": len(m), "dim": m.dim},
        witnesses=witnesses,
    )


def require_valid(m: KrausMeasurement, tol: ToleranceConfig = DEFAULT_TOL) -> None:
    defect = completeness_defect(m)
    if defect > tol.tol_projector:
        raise InvalidMeasurementError(f"measurement is not complete (||sum M^dag M - I||_F = {defect:.3g})")


def as_density_matrix(rho, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Validate a mixed state: Hermitian, positive semidefinite, unit trace."""
    r = as_square(rho, "rho")
    if hermitian_defect(r) > tol.tol_hermitian:
        raise InvalidStateError("rho is not Hermitian")
    r = (r + dagger(r)) / 2
    trace = float(np.trace(r).real)
    if abs(trace - 1.0) > tol.tol_hermitian:
        raise InvalidStateError(f"rho has trace {trace!r}, expected 1")
    lowest = float(np.linalg.eigvalsh(r)[0])
    if lowest < -tol.tol_hermitian:
        raise InvalidStateError(f"rho has negative eigenvalue {lowest:.3g}")
    return r


def outcome_distribution(m: KrausMeasurement, rho, tol: ToleranceConfig = DEFAULT_TOL) -> OutcomeDistribution:
    """Probabilities ``tr[M_i rho M_i^dag]`` and normalized conditional states."""
    require_valid(m, tol)
    r = as_density_matrix(rho, tol)
    _check_dims(m, r, "rho")
    probs, states = [], []
    for op in m.operators:
        unnormalized = op @ r @ dagger(op)
        p = float(np.trace(unnormalized).real)
        probs.append(max(p, 0.0))
        states.append(unnormalized / p if p >= tol.tol_defect else None)
    return OutcomeDistribution(np.array(probs), tuple(states))


def unconditional_post_state(m: KrausMeasurement, rho, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``sum_i M_i rho M_i^dag``: the post-measurement state with the result unread."""
    require_valid(m, tol)
    r = as_density_matrix(rho, tol)
    _check_dims(m, r, "rho")
    return sum(op @ r @ dagger(op) for op in m.operators)


def expected_value(h, rho, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``tr[rho H]``.

    Raises:
        NotHermitianError: if the trace has an imaginary part above
            ``tol_defect``, which only happens for non-Hermitian ``h``.
    """
    hm = as_square(h, "h")
    r = as_square(rho, "rho")
    if hm.shape != r.shape:
        raise DimensionMismatchError(f"h has shape {hm.shape}, rho has shape {r.shape}")
    value = np.trace(r @ hm)
    if abs(value.imag) > tol.tol_defect:
        raise NotHermitianError(f"tr[rho H] has imaginary part {value.imag:.3g}; H is not Hermitian")
    return float(value.real)


def conservation_defect(m: KrausMeasurement, h) -> tuple[np.ndarray, float]:
    """Return ``D = sum_i M_i^dag H M_i - H`` and ``||D||_F``.

    ``m`` conserves ``h`` for every input state iff ``D`` vanishes.
    """
    hm = as_square(h, "h")
    _check_dims(m, hm, "h")
    d = sum(dagger(op) @ hm @ op for op in m.operators) - hm
    return d, frobenius(d)


def commutation_defect(m: KrausMeasurement, h) -> float:
    """``max_i ||[M_i, H]||_F``."""
    hm = as_square(h, "h")
    _check_dims(m, hm, "h")
    return max(frobenius(commutator(op, hm)) for op in m.operators)


def conserves(m: KrausMeasurement, h, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return conservation_defect(m, h)[1] <= tol.tol_defect


def check_conservation(m: KrausMeasurement, h, tol: ToleranceConfig = DEFAULT_TOL) -> Verdict:
    """Verdict that passes iff ``m`` is complete and conserves ``h``."""
    d, d_norm = conservation_defect(m, h)
    witnesses = (("conservation_defect", d),) if d_norm > tol.tol_defect else ()
    return Verdict(
        (
            Check("completeness", completeness_defect(m), tol.tol_projector, "||sum M_i^dag M_i - I||_F"),
            Check("conservation", d_norm, tol.tol_defect, "||sum M_i^dag H M_i - H||_F"),
        ),
        facts={"commutation_defect": commutation_defect(m, h), "kind": m.kind},
        witnesses=witnesses,
    )


def theorem1_check(p: KrausMeasurement, h, tol: ToleranceConfig = DEFAULT_TOL) -> Verdict:
    """Check that a projective measurement conserves ``h`` iff it commutes with it.

    The verdict passes when both defects fall on the same side of
    ``tol_defect``. Whether the measurement actually conserves ``h`` is
    reported in ``facts["conserves"]``.

    Raises:
        InvalidMeasurementError: if the operators are not an orthogonal
            resolution of the identity.
    """
    if not is_orthogonal_resolution(p.operators, tol):
        raise InvalidMeasurementError("operators are not orthogonal projectors summing to the identity")
    d, cons = conservation_defect(p, h)
    comm = commutation_defect(p, h)
    conserving = cons <= tol.tol_defect
    commuting = comm <= tol.tol_defect
    witnesses = []
    if not conserving:
        witnesses.append(("conservation_defect", d))
    if not commuting:
        worst = max(p.operators, key=lambda op: frobenius(commutator(op, h)))
        witnesses.append(("worst_commutator", commutator(worst, h)))
    return Verdict(
        (logical_check("biconditional", conserving == commuting, "conserves <=> all projectors commute with H"),),
        facts={
            "conservation_defect": cons,
            "commutation_defect": comm,
            "conserves": conserving,
            "commutes": commuting,
            "threshold": tol.tol_defect,
        },
        witnesses=tuple(witnesses),
    )
