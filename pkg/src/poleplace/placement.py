"""Full-state pole placement for single-input systems.

The methods here assign the entire closed-loop spectrum at once.  All of
them reduce to choosing a row vector in the controller canonical
coordinate frame: the coefficient vector of a polynomial reduced modulo
the open-loop characteristic polynomial, mapped back through the
controllability matrices.  They differ in how much of the work happens
before or after that mapping, which is what gives them different
numerical behaviour on the same problem.

Feedback convention: ``u = k @ x``, closed loop ``A + b k^T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvariantEigenvalueError,
    SingularMatrixError,
    UncontrollableError,
    ValidationError,
)
from .linalg import krylov, solve_linear
from .poly import Polynomial, Spectrum, char_poly, eval_matrix, monic_from_roots
from .verify import Diagnostics, assemble_diagnostics


@dataclass(frozen=True)
class StateSpace:
    """Single-input system ``x' = A x + b u``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ValidationError(f"A must be square and nonempty, got shape {A.shape}")
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise ValidationError(
                f"b has length {b.shape[0]}, expected {A.shape[0]}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValidationError("system matrices must have finite entries")
        object.__setattr__(self, "A", A.copy())
        object.__setattr__(self, "b", b.copy())

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class CanonicalForm:
    """Controller canonical companion pair and the similarity onto it.

    ``A = T @ A_c @ inv(T)`` and ``b = T @ b_c`` with ``T = C @ inv(C_c)``.
    The controllability matrices of both frames and the shared
    characteristic polynomial come along because every placement method
    needs them anyway.
    """

    A_c: np.ndarray
    b_c: np.ndarray
    T: np.ndarray
    C: np.ndarray
    C_c: np.ndarray
    p: Polynomial


@dataclass(frozen=True)
class Gain:
    """A computed feedback row with its provenance and diagnostics."""

    k: np.ndarray
    method: str
    diagnostics: Diagnostics


def controllability_matrix(sys: StateSpace) -> np.ndarray:
    """``[b, Ab, ..., A**(n-1) b]``."""
    return krylov(sys.A, sys.b, sys.n)


def controller_canonical(sys: StateSpace) -> CanonicalForm:
    """Controller canonical form of a controllable pair.

    The companion matrix carries ones on the superdiagonal and the negated
    characteristic coefficients in its last row; its input vector is the
    last unit vector.  T is computed through the always well-conditioned
    canonical controllability matrix, so an uncontrollable input shows up
    as a singular T rather than an error here.
    """
    n = sys.n
    q = char_poly(sys.A)
    A_c = np.zeros((n, n))
    for i in range(n - 1):
        A_c[i, i + 1] = 1.0
    A_c[n - 1, :] = -q.coeffs[:n]
    b_c = np.zeros(n)
    b_c[n - 1] = 1.0
    C = controllability_matrix(sys)
    C_c = krylov(A_c, b_c, n)
    T = solve_linear(C_c.T, C.T).T
    return CanonicalForm(A_c=A_c, b_c=b_c, T=T, C=C, C_c=C_c, p=q)


def gamma_vector(q: Polynomial, n: int) -> np.ndarray:
    """Ascending coefficients of q padded to length n.

    Coefficients beyond index n-1 must be exactly zero; a polynomial of
    true degree n or more does not fit and is rejected.
    """
    c = q.coeffs
    if c.size > n and np.any(c[n:] != 0.0):
        raise ValidationError(
            f"polynomial of degree {q.degree} does not fit in {n} coefficients"
        )
    out = np.zeros(n)
    m = min(n, c.size)
    out[:m] = c[:m]
    return out


def gamma_recursion(q_n: Polynomial, lam1: float) -> np.ndarray:
    """Coefficient recursion dividing ``q_n`` by ``(x - lam1)``.

    Runs the leading coefficient down through the polynomial, which is
    synthetic division by the linear factor.  When lam1 is a root of the
    monic ``q_n`` the result holds the ascending coefficients of the
    degree n-1 cofactor; the remainder is dropped, so the caller is
    responsible for lam1 actually being (close to) a root.
    """
    if not q_n.is_monic:
        raise ValidationError("gamma_recursion expects a monic polynomial")
    n = q_n.degree
    if n < 1:
        raise ValidationError("gamma_recursion needs degree at least 1")
    desc = q_n.coeffs[::-1]
    g = np.empty(n)
    g[0] = 1.0
    for i in range(1, n):
        g[i] = desc[i] + lam1 * g[i - 1]
    return g[::-1].copy()


def gamma_full(factor: Polynomial, q_n: Polynomial) -> np.ndarray:
    """Length-n coefficient vector of ``factor`` reduced modulo ``q_n``.

    ``factor`` is the monic product of the target eigenvalues that are
    not pulled out as matrix factors.  Its degree is at most n; at exactly
    n one copy of the monic ``q_n`` is subtracted, which cancels the
    leading term exactly and leaves the Bass-Gura difference vector.
    """
    n = q_n.degree
    if not (factor.is_monic and q_n.is_monic):
        raise ValidationError("gamma_full expects monic polynomials")
    if factor.degree > n:
        raise ValidationError(
            f"factor degree {factor.degree} exceeds the system degree {n}"
        )
    if factor.degree == n:
        return gamma_vector(Polynomial(factor.coeffs - q_n.coeffs), n)
    return gamma_vector(factor, n)


def omega_vector(sys: StateSpace, gamma) -> np.ndarray:
    """Map a canonical-frame coefficient row back to original coordinates.

    Computes ``omega`` with ``omega^T = gamma^T C_c C^{-1}``.  This is the
    single place the original controllability matrix gets inverted, so an
    uncontrollable system surfaces here with the rank estimate from the
    failed elimination column.
    """
    cf = controller_canonical(sys)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (sys.n,):
        raise ValidationError(f"gamma has shape {gamma.shape}, expected ({sys.n},)")
    try:
        return solve_linear(cf.C.T, cf.C_c.T @ gamma)
    except SingularMatrixError as exc:
        raise UncontrollableError(
            f"controllability matrix is singular to working precision; "
            f"rank estimate {exc.column} < {sys.n}"
        ) from exc


def place_eigenpair(sys: StateSpace, omega, lam1: float) -> Gain:
    """Move one real eigenvalue using its left eigenvector.

    ``omega`` is a left eigenvector of A for a real eigenvalue; the gain
    ``k^T = omega^T (lam1 I - A) / (omega^T b)`` moves that eigenvalue to
    ``lam1`` and provably leaves every other eigenvalue fixed.  An omega
    orthogonal to b means feedback cannot reach the mode at all.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (sys.n,):
        raise ValidationError(f"omega has shape {omega.shape}, expected ({sys.n},)")
    lam1 = float(lam1)
    s = float(omega @ sys.b)
    scale = float(np.linalg.norm(omega) * np.linalg.norm(sys.b))
    if abs(s) < 1e-9 * scale:
        raise InvariantEigenvalueError(
            f"omega^T b = {s:.3e} is negligible against |omega||b| = {scale:.3e}; "
            "this eigenvalue is invariant under feedback through b"
        )
    w = omega / s
    k = lam1 * w - w @ sys.A
    return Gain(k=k, method="eigenpair", diagnostics=assemble_diagnostics(sys, k))


def place_bass_gura(sys: StateSpace, targets) -> Gain:
    """Assign the full spectrum via the coefficient difference vector.

    The canonical-frame gain is the open-loop minus desired coefficient
    vector; one controllability solve maps it back.
    """
    targets = targets if isinstance(targets, Spectrum) else Spectrum(targets)
    if len(targets) != sys.n:
        raise ValidationError(f"{len(targets)} targets for an order-{sys.n} system")
    cf = controller_canonical(sys)
    pdes = monic_from_roots(targets)
    diff = gamma_vector(Polynomial(cf.p.coeffs - pdes.coeffs), sys.n)
    try:
        k = solve_linear(cf.C.T, cf.C_c.T @ diff)
    except SingularMatrixError as exc:
        raise UncontrollableError(
            f"controllability matrix is singular to working precision; "
            f"rank estimate {exc.column} < {sys.n}"
        ) from exc
    return Gain(k=k, method="bass_gura", diagnostics=assemble_diagnostics(sys, k, targets))


def place_ackermann(sys: StateSpace, targets) -> Gain:
    """Assign the full spectrum via the desired polynomial in A.

    ``k^T = -e_n^T C^{-1} p(A)``: the polynomial is evaluated at the
    matrix first, then hit with the last row of the inverse
    controllability matrix.
    """
    targets = targets if isinstance(targets, Spectrum) else Spectrum(targets)
    if len(targets) != sys.n:
        raise ValidationError(f"{len(targets)} targets for an order-{sys.n} system")
    C = controllability_matrix(sys)
    e_n = np.zeros(sys.n)
    e_n[sys.n - 1] = 1.0
    try:
        row = solve_linear(C.T, e_n)
    except SingularMatrixError as exc:
        raise UncontrollableError(
            f"controllability matrix is singular to working precision; "
            f"rank estimate {exc.column} < {sys.n}"
        ) from exc
    M = eval_matrix(monic_from_roots(targets), sys.A)
    k = -(M.T @ row)
    return Gain(k=k, method="ackermann", diagnostics=assemble_diagnostics(sys, k, targets))


def place_general(sys: StateSpace, targets, pulled) -> Gain:
    """Assign the full spectrum with part of it pulled into matrix factors.

    ``pulled`` is a self-conjugate sub-multiset of the targets.  Those
    roots are applied as the matrix product ``prod(A - lam I)`` while the
    remaining factor stays at the coefficient level.  Pulling nothing is
    the coefficient-difference method; pulling everything is the
    polynomial-in-A method; anything between trades one kind of rounding
    for the other.
    """
    targets = targets if isinstance(targets, Spectrum) else Spectrum(targets)
    pulled = pulled if isinstance(pulled, Spectrum) else Spectrum(pulled)
    if len(targets) != sys.n:
        raise ValidationError(f"{len(targets)} targets for an order-{sys.n} system")
    if not targets.contains(pulled):
        raise ValidationError("pulled values must be a sub-multiset of the targets")
    cf = controller_canonical(sys)
    factor = monic_from_roots(targets.minus(pulled))
    gamma = gamma_full(factor, cf.p)
    try:
        omega = solve_linear(cf.C.T, cf.C_c.T @ gamma)
    except SingularMatrixError as exc:
        raise UncontrollableError(
            f"controllability matrix is singular to working precision; "
            f"rank estimate {exc.column} < {sys.n}"
        ) from exc
    if len(pulled) == 0:
        k = -omega
    else:
        M = eval_matrix(monic_from_roots(pulled), sys.A)
        k = -(M.T @ omega)
    return Gain(k=k, method="general", diagnostics=assemble_diagnostics(sys, k, targets))
