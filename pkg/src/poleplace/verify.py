"""Verification oracles for computed feedback gains.

Two deliberately independent routes check every placement: the
characteristic polynomial of the closed loop computed by the trace
recurrence (no eigenvalue solver involved), and the closed-loop spectrum
from the Schur iteration matched against the request.  Agreement of both
is strong evidence; disagreement points at which half went wrong.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantEigenvalueError, ValidationError
from .linalg import condition_number, determinant, eigenvalues, krylov, solve_linear
from .poly import Spectrum, char_poly, monic_from_roots

ILL_CONDITIONED = 1e8


@dataclass(frozen=True)
class Diagnostics:
    """Conditioning and residual record attached to every computed gain.

    ``step_kappas`` holds the condition numbers of the per-step
    controllability solves for subspace methods; full-spectrum methods
    leave it empty.  Residual fields stay None when the method does not
    know the complete target spectrum.
    """

    kappa_controllability: float
    step_kappas: tuple[float, ...] = ()
    charpoly_residual: float | None = None
    spectrum_residual: float | None = None
    warnings: tuple[str, ...] = ()


def closed_loop(sys, k) -> np.ndarray:
    """Closed-loop matrix ``A + b k^T``."""
    k = np.asarray(k, dtype=float)
    if k.shape != (sys.n,):
        raise ValidationError(f"gain has shape {k.shape}, expected ({sys.n},)")
    if not np.all(np.isfinite(k)):
        raise ValidationError("gain must have finite entries")
    return sys.A + np.outer(sys.b, k)


def charpoly_residual(sys, k, targets) -> float:
    """Coefficient-level placement error, via the trace recurrence.

    Compares the characteristic polynomial of ``A + b k^T`` against the
    monic polynomial built from the targets, coefficient by coefficient,
    each scaled by ``max(1, |coefficient|)``.
    """
    targets = targets if isinstance(targets, Spectrum) else Spectrum(targets)
    if len(targets) != sys.n:
        raise ValidationError(f"{len(targets)} targets for an order-{sys.n} system")
    achieved = char_poly(closed_loop(sys, k))
    wanted = monic_from_roots(targets)
    num = np.abs(achieved.coeffs - wanted.coeffs)
    den = np.maximum(1.0, np.abs(wanted.coeffs))
    return float(np.max(num / den))


def _bottleneck_assign(d) -> float:
    """Smallest achievable largest pairing distance, exactly.

    Binary search over the distinct distances; feasibility of each
    threshold is a bipartite matching question answered by augmenting
    paths.
    """
    n = d.shape[0]
    levels = np.unique(d)

    def feasible(limit):
        match = [-1] * n
        allowed = d <= limit

        def augment(u, seen):
            for v in range(n):
                if allowed[u, v] and not seen[v]:
                    seen[v] = True
                    if match[v] < 0 or augment(match[v], seen):
                        match[v] = u
                        return True
            return False

        return all(augment(u, [False] * n) for u in range(n))

    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def _greedy_assign(d) -> float:
    """Cheap upper bound on the bottleneck distance for larger spectra."""
    n = d.shape[0]
    work = d.copy()
    out = 0.0
    for _ in range(n):
        i, j = np.unravel_index(int(np.argmin(work)), work.shape)
        out = max(out, float(work[i, j]))
        work[i, :] = np.inf
        work[:, j] = np.inf
    return out


def spectrum_distance(got, want) -> float:
    """Bottleneck distance between two equal-size spectra.

    The value is the largest pointwise distance under the best one-to-one
    pairing.  Exact (matching-based) up to 12 values, greedy beyond; the
    greedy answer can only overestimate.
    """
    got = got if isinstance(got, Spectrum) else Spectrum(got)
    want = want if isinstance(want, Spectrum) else Spectrum(want)
    if len(got) != len(want):
        raise ValidationError(
            f"cannot compare spectra of sizes {len(got)} and {len(want)}"
        )
    if len(got) == 0:
        return 0.0
    g = np.array(list(got), dtype=complex)
    w = np.array(list(want), dtype=complex)
    d = np.abs(g[:, None] - w[None, :])
    if len(got) <= 12:
        return _bottleneck_assign(d)
    return _greedy_assign(d)


def assemble_diagnostics(sys, k, targets=None, step_kappas=()) -> Diagnostics:
    """Build the Diagnostics record for a gain on a given system.

    Residuals are filled only when the full target spectrum is known.
    An ill-conditioned controllability matrix earns a warning rather than
    an error: the gain is still returned, with notice that its digits may
    not survive closed-loop arithmetic.
    """
    kap = condition_number(krylov(sys.A, sys.b, sys.n))
    warnings = ()
    if not kap <= ILL_CONDITIONED:
        warnings = (
            f"controllability matrix condition number {kap:.3e} exceeds "
            f"{ILL_CONDITIONED:.0e}; placement accuracy is degraded",
        )
    cres = sres = None
    if targets is not None:
        cres = charpoly_residual(sys, k, targets)
        sres = spectrum_distance(eigenvalues(closed_loop(sys, k)), targets)
    return Diagnostics(
        kappa_controllability=kap,
        step_kappas=tuple(float(x) for x in step_kappas),
        charpoly_residual=cres,
        spectrum_residual=sres,
        warnings=warnings,
    )


def diagnostics(sys, gain, targets) -> Diagnostics:
    """Recompute diagnostics for an existing gain against a target spectrum,
    keeping the per-step conditioning the gain was computed with."""
    return assemble_diagnostics(
        sys, gain.k, targets, step_kappas=gain.diagnostics.step_kappas
    )


@dataclass(frozen=True)
class AdjugateReport:
    """Residuals of the rank-one update determinant identity, both ways.

    ``direct`` tests ``det(sI - Abar) = (s - lam1) * w^T adj(sI - A) b``
    and ``swapped`` the same with the adjugate transposed.  Only one of
    the two can hold for a generic system; ``consistent`` names it.
    """

    residual_direct: float
    residual_swapped: float
    consistent: str
    samples: tuple[float, ...]


def adjugate_identity_report(sys, omega, lam1, samples) -> AdjugateReport:
    """Probe the closed-loop determinant identity at real sample points.

    ``omega`` and ``lam1`` describe a single-eigenvalue move as in the
    eigenpair method.  Each sample must stay away from the open-loop
    spectrum so the adjugate is formed from a well-defined inverse.
    """
    from .placement import place_eigenpair

    samples = tuple(float(s) for s in samples)
    if not samples:
        raise ValidationError("at least one sample point is required")
    omega = np.asarray(omega, dtype=float)
    gain = place_eigenpair(sys, omega, lam1)
    Abar = closed_loop(sys, gain.k)
    s_b = float(omega @ sys.b)
    scale = float(np.linalg.norm(omega) * np.linalg.norm(sys.b))
    if abs(s_b) < 1e-9 * scale:
        raise InvariantEigenvalueError(
            "omega^T b is negligible; the identity is not defined"
        )
    w = omega / s_b
    eye = np.eye(sys.n)
    rd = rs = 0.0
    for s in samples:
        M = s * eye - sys.A
        det_open = determinant(M)
        if abs(det_open) < 1e-9:
            raise ValidationError(
                f"sample point {s} is too close to the open-loop spectrum "
                f"(|det| = {abs(det_open):.3e})"
            )
        adj = det_open * solve_linear(M, eye)
        det_closed = determinant(s * eye - Abar)
        ref = max(1.0, abs(det_closed))
        direct = (s - lam1) * float(w @ adj @ sys.b)
        swapped = (s - lam1) * float(sys.b @ adj @ w)
        rd = max(rd, abs(det_closed - direct) / ref)
        rs = max(rs, abs(det_closed - swapped) / ref)
    return AdjugateReport(
        residual_direct=rd,
        residual_swapped=rs,
        consistent="direct" if rd <= rs else "swapped",
        samples=samples,
    )


def adjugate_identity_check(sys, omega, lam1, samples) -> float:
    """Best residual of the determinant identity over both orientations."""
    rep = adjugate_identity_report(sys, omega, lam1, samples)
    return min(rep.residual_direct, rep.residual_swapped)
