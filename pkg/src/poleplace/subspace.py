"""Partial and sequential pole placement through invariant subspaces.

Instead of inverting the full controllability matrix, these methods
reorder a Schur form so the eigenvalues being moved lead, compress the
dynamics onto that subspace, and solve a placement problem of only that
size.  Eigenvalues outside the subspace provably stay put, and the only
inversions are as large as the largest group being moved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvariantEigenvalueError,
    PolePlacementError,
    RankDeficiencyError,
    SingularMatrixError,
    ValidationError,
)
from .linalg import (
    EPS,
    InvariantSplit,
    _match_values,
    condition_number,
    eigenvalues,
    invariant_split,
    krylov,
    max_abs,
    solve_linear,
)
from .placement import Gain, StateSpace
from .poly import Spectrum, eval_matrix, monic_from_roots
from .verify import assemble_diagnostics


@dataclass(frozen=True)
class AssignmentPlan:
    """Ordered groups of (move, to) spectra processed one feedback at a time."""

    groups: tuple[tuple[Spectrum, Spectrum], ...]

    def __post_init__(self):
        groups = []
        for gi, pair in enumerate(self.groups):
            move, to = pair
            move = move if isinstance(move, Spectrum) else Spectrum(move)
            to = to if isinstance(to, Spectrum) else Spectrum(to)
            if len(move) == 0:
                raise ValidationError(f"group {gi + 1} is empty")
            if len(move) != len(to):
                raise ValidationError(
                    f"group {gi + 1} moves {len(move)} eigenvalues "
                    f"to {len(to)} values"
                )
            groups.append((move, to))
        object.__setattr__(self, "groups", tuple(groups))


@dataclass(frozen=True)
class StepRecord:
    """What one sequential step did: the subspace it worked in, the small
    solve it ran, and the spectrum it left behind."""

    step: int
    basis: np.ndarray
    compression: np.ndarray
    selector: np.ndarray
    gain: np.ndarray
    kappa: float
    spectrum_after: Spectrum


def projected_controllability_rank(sys: StateSpace, U) -> tuple[int, float]:
    """Rank and condition of the controllability structure seen through U.

    Forms ``U^T [b, Ab, ...]`` with as many columns as U has, then counts
    elimination pivots above the singularity threshold.  Full rank with a
    moderate condition number is what makes a subspace placement solvable.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != sys.n:
        raise ValidationError(f"basis has shape {U.shape}, expected ({sys.n}, r)")
    r = U.shape[1]
    if not 1 <= r <= sys.n:
        raise ValidationError(f"basis must have 1..{sys.n} columns, got {r}")
    P = U.T @ krylov(sys.A, sys.b, r)
    work = P.copy()
    limit = r * EPS * max_abs(P)
    rank = 0
    for k in range(r):
        j = k + int(np.argmax(np.abs(work[k:, k])))
        pivot = work[j, k]
        if abs(pivot) < limit or pivot == 0.0:
            break
        if j != k:
            work[[k, j]] = work[[j, k]]
        work[k + 1 :, k] /= work[k, k]
        work[k + 1 :, k + 1 :] -= np.outer(work[k + 1 :, k], work[k, k + 1 :])
        rank += 1
    return rank, condition_number(P)


def _gain_on_split(b, split: InvariantSplit, to: Spectrum):
    """Gain placing the compressed spectrum of a split at ``to``.

    Solves the r-dimensional analogue of the polynomial-in-A formula on
    the compression X, then lifts the row back through the left-invariant
    basis.  Returns the gain, the selector row, and the condition of the
    small controllability matrix.
    """
    r = split.X.shape[0]
    bu = split.U.T @ b
    CX = krylov(split.X, bu, r)
    e_r = np.zeros(r)
    e_r[r - 1] = 1.0
    try:
        eta = solve_linear(CX.T, e_r)
    except SingularMatrixError as exc:
        raise RankDeficiencyError(
            f"controllability restricted to the moved subspace has rank "
            f"{exc.column} < {r}; these eigenvalues cannot be assigned together"
        ) from exc
    mX = eval_matrix(monic_from_roots(to), split.X)
    k = -(split.U @ (mX.T @ eta))
    return k, eta, condition_number(CX)


def place_partial(sys: StateSpace, move, to) -> Gain:
    """Move a chosen part of the spectrum, leaving the rest untouched.

    ``move`` names eigenvalues of A and ``to`` their replacements, both
    self-conjugate and of equal size.  The kept eigenvalues are protected
    structurally, by working entirely inside the reordered invariant
    subspace, not by cancellation.
    """
    move = move if isinstance(move, Spectrum) else Spectrum(move)
    to = to if isinstance(to, Spectrum) else Spectrum(to)
    if len(move) != len(to):
        raise ValidationError(
            f"moving {len(move)} eigenvalues to {len(to)} values"
        )
    split = invariant_split(sys.A, move)
    k, _, kappa = _gain_on_split(sys.b, split, to)
    full = Spectrum(tuple(to) + tuple(split.kept))
    return Gain(
        k=k,
        method="partial",
        diagnostics=assemble_diagnostics(sys, k, full, step_kappas=(kappa,)),
    )


def place_simon_mitter(sys: StateSpace, mu1, lam1) -> Gain:
    """Shift one real eigenvalue by a rank-one update along its left
    eigenvector.

    ``k = (lam1 - mu1) * omega`` with omega the left eigenvector of
    ``mu1`` scaled to ``omega^T b = 1``.  Requesting ``lam1 == mu1``
    returns an exactly zero gain, since the difference multiplies
    everything else out.
    """
    mu1 = complex(mu1)
    lam1 = complex(lam1)
    if mu1.imag != 0.0 or lam1.imag != 0.0:
        raise ValidationError("the single-shift method moves a real eigenvalue "
                              "to a real target")
    mu1, lam1 = mu1.real, lam1.real
    split = invariant_split(sys.A, [mu1])
    u = split.U[:, 0]
    s = float(u @ sys.b)
    scale = float(np.linalg.norm(u) * np.linalg.norm(sys.b))
    if abs(s) < 1e-9 * scale:
        raise InvariantEigenvalueError(
            f"left eigenvector for {mu1} is orthogonal to b "
            f"(omega^T b = {s:.3e}); the eigenvalue cannot be moved"
        )
    omega = u / s
    k = (lam1 - mu1) * omega
    full = Spectrum((lam1,) + tuple(split.kept))
    kappa = condition_number(np.array([[s]]))
    return Gain(
        k=k,
        method="simon_mitter",
        diagnostics=assemble_diagnostics(sys, k, full, step_kappas=(kappa,)),
    )


def plan_targets(sys: StateSpace, plan: AssignmentPlan) -> Spectrum:
    """Expected final spectrum after running a plan on a system.

    Plays the plan through at the value level: each group's ``move`` set
    is matched against the running spectrum (starting from the computed
    eigenvalues of A) and replaced by its ``to`` set.  Later groups may
    re-move values placed by earlier ones.
    """
    current = list(eigenvalues(sys.A))
    tol = 1e-6 * max(1.0, max_abs(sys.A))
    for move, to in plan.groups:
        matched = _match_values(list(move), current, tol)
        current = [z for i, z in enumerate(current) if i not in set(matched)]
        current.extend(to)
    return Spectrum(current)


def paired_plan(sys: StateSpace, targets) -> AssignmentPlan:
    """Group the open-loop spectrum and the targets into steps of size at
    most two.

    Conjugate pairs move together.  Pairs match target pairs by descending
    modulus and reals match target reals the same way; when the counts
    differ, a leftover pair takes the two largest real targets, or two
    leftover reals take a target pair.  Parity makes the counts work out.
    """
    targets = targets if isinstance(targets, Spectrum) else Spectrum(targets)
    if len(targets) != sys.n:
        raise ValidationError(
            f"{len(targets)} targets for a system of dimension {sys.n}"
        )

    def buckets(values):
        reals = sorted((z.real for z in values if z.imag == 0.0),
                       key=abs, reverse=True)
        pairs = sorted((z for z in values if z.imag > 0.0),
                       key=abs, reverse=True)
        return reals, pairs

    o_reals, o_pairs = buckets(eigenvalues(sys.A))
    t_reals, t_pairs = buckets(targets)
    groups = []
    common = min(len(o_pairs), len(t_pairs))
    for z, w in zip(o_pairs[:common], t_pairs[:common]):
        groups.append(((z, z.conjugate()), (w, w.conjugate())))
    for z in o_pairs[common:]:
        groups.append(((z, z.conjugate()), (t_reals.pop(0), t_reals.pop(0))))
    for w in t_pairs[common:]:
        groups.append(((o_reals.pop(0), o_reals.pop(0)), (w, w.conjugate())))
    for z, w in zip(o_reals, t_reals):
        groups.append(((z,), (w,)))
    return AssignmentPlan(tuple(groups))


def place_sequential(sys: StateSpace, plan: AssignmentPlan) -> tuple[Gain, list[StepRecord]]:
    """Run an assignment plan one group at a time, accumulating the gain.

    Each step takes a fresh Schur form of the current closed loop, moves
    only its group's eigenvalues, and applies the feedback before the next
    step looks at the system.  The input direction never changes, so the
    accumulated rows sum into a single equivalent gain.  A failing step
    raises with ``step`` and ``records`` attached for everything completed
    before it.
    """
    if not isinstance(plan, AssignmentPlan):
        plan = AssignmentPlan(tuple(plan))
    if not plan.groups:
        raise ValidationError("plan has no groups")
    expected = plan_targets(sys, plan)
    A_now = sys.A.copy()
    k_total = np.zeros(sys.n)
    records: list[StepRecord] = []
    for step, (move, to) in enumerate(plan.groups, start=1):
        try:
            split = invariant_split(A_now, move)
            k_step, eta, kappa = _gain_on_split(sys.b, split, to)
        except PolePlacementError as exc:
            exc.step = step
            exc.records = tuple(records)
            raise
        A_now = A_now + np.outer(sys.b, k_step)
        k_total = k_total + k_step
        records.append(
            StepRecord(
                step=step,
                basis=split.U,
                compression=split.X,
                selector=eta,
                gain=k_step,
                kappa=kappa,
                spectrum_after=eigenvalues(A_now),
            )
        )
    diag = assemble_diagnostics(
        sys, k_total, expected, step_kappas=tuple(r.kappa for r in records)
    )
    return Gain(k=k_total, method="sequential", diagnostics=diag), records
