"""Dense real linear algebra built around a lower quasi-triangular Schur form.

Everything here is hand rolled on top of numpy array arithmetic: pivoted
elimination for solves, Householder reduction plus double-shift QR for the
Schur form, and Sylvester-based adjacent swaps for reordering.  The package
convention is the lower form ``A = Q @ T @ Q.T`` with T lower quasi
triangular; internally the iteration runs on the transpose in the familiar
upper form and the result is transposed back at the boundary.

Real eigenvalues appear as 1x1 diagonal blocks.  A 2x2 block normally
carries a complex conjugate pair stored so the two reported values are
exact bitwise conjugates; a 2x2 whose discriminant is negative but within
rounding noise of zero is left in place and reported as a repeated real
pair, because splitting it would not be backward stable.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousMatchError,
    BlockSwapError,
    ConvergenceError,
    MatchingError,
    SingularMatrixError,
    ValidationError,
)
from .poly import Spectrum

EPS = float(np.finfo(float).eps)


def max_abs(M) -> float:
    """Largest entry magnitude, 0.0 for an empty array."""
    M = np.asarray(M, dtype=float)
    return float(np.max(np.abs(M))) if M.size else 0.0


def _as_square(A, name="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValidationError(f"{name} must be square and nonempty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} must have finite entries")
    return A


# ---------------------------------------------------------------------------
# solves and friends


def solve_linear(M, rhs) -> np.ndarray:
    """Solve ``M x = rhs`` by row-pivoted elimination.

    ``rhs`` may be a vector or a matrix of stacked right-hand sides.  A
    pivot below ``n * ulp(1) * max|M|`` raises SingularMatrixError whose
    ``column`` attribute is the elimination column that failed; that column
    index is also a rank estimate.
    """
    M = _as_square(M)
    n = M.shape[0]
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != n:
        raise ValidationError(f"right-hand side has {rhs.shape[0]} rows, expected {n}")
    if not np.all(np.isfinite(rhs)):
        raise ValidationError("right-hand side must have finite entries")
    LU = M.copy()
    perm = np.arange(n)
    limit = n * EPS * max_abs(M)
    for k in range(n):
        j = k + int(np.argmax(np.abs(LU[k:, k])))
        pivot = LU[j, k]
        if abs(pivot) < limit or pivot == 0.0:
            raise SingularMatrixError(
                f"matrix is singular to working precision at column {k} "
                f"(pivot {abs(pivot):.3e}, threshold {limit:.3e})",
                column=k,
            )
        if j != k:
            LU[[k, j]] = LU[[j, k]]
            perm[[k, j]] = perm[[j, k]]
        LU[k + 1 :, k] /= LU[k, k]
        LU[k + 1 :, k + 1 :] -= np.outer(LU[k + 1 :, k], LU[k, k + 1 :])
    x = rhs[perm].astype(float)
    for k in range(1, n):
        x[k] -= LU[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - LU[k, k + 1 :] @ x[k + 1 :]) / LU[k, k]
    return x


def determinant(M) -> float:
    """Determinant by elimination.  Tolerates singular input, returning 0."""
    LU = _as_square(M).copy()
    n = LU.shape[0]
    det = 1.0
    for k in range(n):
        j = k + int(np.argmax(np.abs(LU[k:, k])))
        if LU[j, k] == 0.0:
            return 0.0
        if j != k:
            LU[[k, j]] = LU[[j, k]]
            det = -det
        det *= LU[k, k]
        LU[k + 1 :, k + 1 :] -= np.outer(LU[k + 1 :, k] / LU[k, k], LU[k, k + 1 :])
    return det


def krylov(A, b, m) -> np.ndarray:
    """Columns ``[b, Ab, ..., A**(m-1) b]``."""
    A = _as_square(A, "A")
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if b.shape != (n,):
        raise ValidationError(f"vector has shape {b.shape}, expected ({n},)")
    if not np.all(np.isfinite(b)):
        raise ValidationError("vector must have finite entries")
    if not 1 <= int(m) <= 10 * n:
        raise ValidationError(f"column count {m} out of range")
    C = np.empty((n, int(m)))
    v = b.copy()
    for j in range(int(m)):
        C[:, j] = v
        v = A @ v
    return C


def condition_number(M) -> float:
    """Spectral condition number via the eigenvalues of ``M.T @ M``.

    Reuses the package's own Schur iteration rather than an external SVD.
    Returns ``inf`` when the smallest squared singular value is not
    distinguishable from zero.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValidationError("condition_number needs a nonempty 2-D matrix")
    if not np.all(np.isfinite(M)):
        raise ValidationError("condition_number needs finite entries")
    G = M.T @ M
    dec = real_schur(G)
    vals = [z.real for blk in dec.blocks for z in blk.eigenvalues]
    hi = max(vals)
    lo = min(vals)
    if hi <= 0.0 or lo <= 0.0:
        return math.inf
    return math.sqrt(hi / lo)


# ---------------------------------------------------------------------------
# Schur decomposition


@dataclass(frozen=True)
class SchurBlock:
    """One diagonal block: row offset, size (1 or 2), and its eigenvalues.

    For a genuine 2x2 block the two eigenvalues are exact bitwise
    conjugates.  A 2x2 block flagged by the discriminant clamp reports a
    repeated real pair instead.
    """

    start: int
    size: int
    eigenvalues: tuple[complex, ...]


@dataclass(frozen=True)
class SchurDecomposition:
    """Orthogonal Q and lower quasi-triangular T with ``A = Q @ T @ Q.T``."""

    Q: np.ndarray
    T: np.ndarray
    blocks: tuple[SchurBlock, ...]

    @property
    def n(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True)
class InvariantSplit:
    """Partition of state space along the moved eigenvalues.

    In the lower Schur form the leading columns U are a left-invariant
    basis, ``U.T @ A = X @ U.T``, carrying the ``moved`` eigenvalues; the
    trailing columns V are right-invariant, ``A @ V = V @ Y``, carrying the
    ``kept`` ones.  X and Y are the lower quasi-triangular compressions
    ``U.T @ A @ U`` and ``V.T @ A @ V``.
    """

    U: np.ndarray
    V: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    moved: Spectrum
    kept: Spectrum


def _householder(x):
    """Reflector ``(v, beta)`` with ``(I - beta v v^T) x = alpha e1``.

    beta = 0 signals a skip: x is already a multiple of e1, and skipping
    keeps an already reduced matrix bitwise unchanged.
    """
    if np.all(x[1:] == 0.0):
        return np.zeros_like(x), 0.0, float(x[0])
    normx = float(np.linalg.norm(x))
    alpha = -normx if x[0] >= 0.0 else normx
    v = np.array(x, dtype=float)
    v[0] -= alpha
    beta = 2.0 / float(v @ v)
    return v, beta, alpha


def _hessenberg_upper(B):
    """Reduce B to upper Hessenberg form in place logic: returns (Q, H)."""
    n = B.shape[0]
    H = B.copy()
    Q = np.eye(n)
    for k in range(n - 2):
        v, beta, alpha = _householder(H[k + 1 :, k])
        if beta == 0.0:
            continue
        H[k + 1 :, k:] -= beta * np.outer(v, v @ H[k + 1 :, k:])
        H[:, k + 1 :] -= beta * np.outer(H[:, k + 1 :] @ v, v)
        Q[:, k + 1 :] -= beta * np.outer(Q[:, k + 1 :] @ v, v)
        H[k + 1, k] = alpha
        H[k + 2 :, k] = 0.0
    return Q, H


def hessenberg(A) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal reduction ``A = Q @ H @ Q.T`` with H lower Hessenberg.

    A matrix that is already lower Hessenberg comes back bitwise unchanged
    with Q the exact identity.
    """
    A = _as_square(A, "A")
    Q, Hu = _hessenberg_upper(A.T.copy())
    return Q, Hu.T.copy()


_CLAMP = 16.0 * EPS


def _block_disc(a, b, c, d):
    p = 0.5 * (a - d)
    scale = abs(a) + abs(b) + abs(c) + abs(d)
    return p * p + b * c, _CLAMP * scale * scale


def _block_eigs(a, b, c, d) -> tuple[complex, complex]:
    """Eigenvalues of a 2x2 block, as an exact conjugate or real pair."""
    m = 0.5 * (a + d)
    disc, clamp = _block_disc(a, b, c, d)
    if disc >= 0.0:
        sq = math.sqrt(disc)
        return complex(m + sq), complex(m - sq)
    if disc >= -clamp:
        return complex(m), complex(m)
    im = math.sqrt(-disc)
    return complex(m, im), complex(m, -im)


def _apply_g_full(H, Q, i, G):
    """Apply the 2x2 rotation G as a similarity on rows/cols i, i+1."""
    H[i : i + 2, :] = G.T @ H[i : i + 2, :]
    H[:, i : i + 2] = H[:, i : i + 2] @ G
    Q[:, i : i + 2] = Q[:, i : i + 2] @ G


def _standardize_2x2(H, Q, i, allow_split=True):
    """Bring the 2x2 block at (i, i) of upper quasi-triangular H to standard
    form.

    Real discriminant: rotate onto an eigenvector and split into two 1x1
    blocks (skipped when splitting is disallowed mid-reorder, where it
    would invalidate the caller's block bookkeeping).  Genuinely complex:
    rotate to equal diagonal entries so the eigenvalues read off as
    ``m +- i*sqrt(-bc)``.  Discriminant inside the rounding clamp: leave
    the block alone; it stands for a repeated real pair.
    """
    a, b = H[i, i], H[i, i + 1]
    c, d = H[i + 1, i], H[i + 1, i + 1]
    if c == 0.0:
        return
    disc, clamp = _block_disc(a, b, c, d)
    if disc >= 0.0:
        if not allow_split:
            return
        p = 0.5 * (a - d)
        sq = math.sqrt(disc)
        lam = 0.5 * (a + d) + (sq if p >= 0.0 else -sq)
        v0, v1 = lam - d, c
        nv = math.hypot(v0, v1)
        G = np.array([[v0 / nv, -v1 / nv], [v1 / nv, v0 / nv]])
        _apply_g_full(H, Q, i, G)
        H[i + 1, i] = 0.0
        return
    if disc >= -clamp:
        return
    if a != d:
        tau = (b + c) / (a - d)
        off = math.hypot(tau, 1.0)
        t = tau - off if abs(tau - off) <= abs(tau + off) else tau + off
        cs = 1.0 / math.sqrt(1.0 + t * t)
        sn = t * cs
        G = np.array([[cs, -sn], [sn, cs]])
        _apply_g_full(H, Q, i, G)
    m = 0.5 * (H[i, i] + H[i + 1, i + 1])
    H[i, i] = m
    H[i + 1, i + 1] = m


def _francis_step(H, Q, l, hi, tr, det):
    """One implicit double-shift sweep on the active block l..hi of upper
    Hessenberg H.  The shift pair is given through its trace and
    determinant, so exceptional shifts use the same path."""
    x = H[l, l] * H[l, l] + H[l, l + 1] * H[l + 1, l] - tr * H[l, l] + det
    y = H[l + 1, l] * (H[l, l] + H[l + 1, l + 1] - tr)
    z = H[l + 2, l + 1] * H[l + 1, l]
    for k in range(l, hi - 1):
        col = np.array([x, y, z]) if k == l else H[k : k + 3, k - 1].copy()
        v, beta, alpha = _householder(col)
        if beta != 0.0:
            H[k : k + 3, :] -= beta * np.outer(v, v @ H[k : k + 3, :])
            H[:, k : k + 3] -= beta * np.outer(H[:, k : k + 3] @ v, v)
            Q[:, k : k + 3] -= beta * np.outer(Q[:, k : k + 3] @ v, v)
        if k > l:
            H[k, k - 1] = alpha
            H[k + 1, k - 1] = 0.0
            H[k + 2, k - 1] = 0.0
    col = H[hi - 1 : hi + 1, hi - 2].copy()
    v, beta, alpha = _householder(col)
    if beta != 0.0:
        H[hi - 1 : hi + 1, :] -= beta * np.outer(v, v @ H[hi - 1 : hi + 1, :])
        H[:, hi - 1 : hi + 1] -= beta * np.outer(H[:, hi - 1 : hi + 1] @ v, v)
        Q[:, hi - 1 : hi + 1] -= beta * np.outer(Q[:, hi - 1 : hi + 1] @ v, v)
    H[hi - 1, hi - 2] = alpha
    H[hi, hi - 2] = 0.0


def _francis_upper(H, Q, max_sweeps):
    """Drive upper Hessenberg H to upper quasi-triangular form in place.

    Subdiagonal entries count as converged when small against their
    diagonal neighbours; every tenth stalled sweep swaps in an exceptional
    shift to break symmetry cycles.  Exceeding the sweep budget raises
    ConvergenceError carrying the partial factorization.
    """
    n = H.shape[0]
    hi = n - 1
    sweeps = 0
    stalled = 0
    while hi > 0:
        l = hi
        while l > 0:
            if abs(H[l, l - 1]) <= EPS * (abs(H[l - 1, l - 1]) + abs(H[l, l])):
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            stalled = 0
            continue
        if l == hi - 1:
            _standardize_2x2(H, Q, l)
            hi -= 2
            stalled = 0
            continue
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"QR iteration did not converge within {max_sweeps} sweeps "
                f"(active block rows {l}..{hi})",
                partial_q=Q.copy(),
                partial_t=H.T.copy(),
            )
        sweeps += 1
        stalled += 1
        if stalled % 10 == 0:
            s = abs(H[hi, hi - 1]) + abs(H[hi - 1, hi - 2])
            a = 0.75 * s + H[hi, hi]
            tr = 2.0 * a
            det = a * a + 0.4375 * s * s
        else:
            tr = H[hi - 1, hi - 1] + H[hi, hi]
            det = H[hi - 1, hi - 1] * H[hi, hi] - H[hi - 1, hi] * H[hi, hi - 1]
        _francis_step(H, Q, l, hi, tr, det)
    return sweeps


def _scan_blocks_upper(S) -> tuple[SchurBlock, ...]:
    """Read the diagonal block structure off upper quasi-triangular S.

    The transpose shares starts, sizes and eigenvalues, so the result
    serves the lower form as well.
    """
    n = S.shape[0]
    blocks = []
    i = 0
    while i < n:
        if i + 1 < n and S[i + 1, i] != 0.0:
            lams = _block_eigs(S[i, i], S[i, i + 1], S[i + 1, i], S[i + 1, i + 1])
            blocks.append(SchurBlock(i, 2, lams))
            i += 2
        else:
            blocks.append(SchurBlock(i, 1, (complex(S[i, i]),)))
            i += 1
    return tuple(blocks)


def real_schur(A, max_sweeps=None) -> SchurDecomposition:
    """Real Schur decomposition ``A = Q @ T @ Q.T``, T lower quasi-triangular.

    Householder reduction to Hessenberg form followed by implicit
    double-shift QR, both run on the transpose and transposed back.  The
    default sweep budget is 40 per dimension.
    """
    A = _as_square(A, "A")
    n = A.shape[0]
    Q, H = _hessenberg_upper(A.T.copy())
    budget = 40 * n if max_sweeps is None else int(max_sweeps)
    _francis_upper(H, Q, budget)
    return SchurDecomposition(Q=Q, T=H.T.copy(), blocks=_scan_blocks_upper(H))


def eigenvalues(A) -> Spectrum:
    """Eigenvalues of a real square matrix as a self-conjugate Spectrum,
    read off the diagonal blocks of its Schur form."""
    dec = real_schur(A)
    return Spectrum([z for blk in dec.blocks for z in blk.eigenvalues])


# ---------------------------------------------------------------------------
# reordering


def _complete_qr(W):
    """Full orthogonal factor of a tall full-rank W; first q columns span
    the column space of W."""
    m, q = W.shape
    G = np.eye(m)
    R = W.copy()
    for k in range(min(q, m - 1)):
        v, beta, alpha = _householder(R[k:, k])
        if beta != 0.0:
            R[k:, k:] -= beta * np.outer(v, v @ R[k:, k:])
            G[:, k:] -= beta * np.outer(G[:, k:] @ v, v)
        R[k, k] = alpha
        R[k + 1 :, k] = 0.0
    return G


def _swap_adjacent_upper(S, Z, i, p, q):
    """Exchange the adjacent diagonal blocks of sizes p then q at offset i
    in upper quasi-triangular S, accumulating the rotation into Z.

    Solves the small Sylvester equation for the coupling, orthonormalizes
    the moved invariant basis, and applies the resulting similarity.  An
    ill-conditioned Sylvester system means the blocks share eigenvalues to
    working precision and the swap is refused.
    """
    A11 = S[i : i + p, i : i + p].copy()
    A12 = S[i : i + p, i + p : i + p + q].copy()
    A22 = S[i + p : i + p + q, i + p : i + p + q].copy()
    K = np.kron(np.eye(q), A11) - np.kron(A22.T, np.eye(p))
    kappa = condition_number(K)
    if not math.isfinite(kappa) or kappa > 1.0 / EPS:
        raise BlockSwapError(
            f"cannot swap blocks at rows {i}..{i + p - 1} and "
            f"{i + p}..{i + p + q - 1}: coupling system condition {kappa:.3e}"
        )
    try:
        X = solve_linear(K, -A12.flatten(order="F")).reshape((p, q), order="F")
    except SingularMatrixError as exc:
        raise BlockSwapError(
            f"cannot swap blocks at rows {i}..{i + p - 1} and "
            f"{i + p}..{i + p + q - 1}: coupling system is singular"
        ) from exc
    G = _complete_qr(np.vstack([X, np.eye(q)]))
    rows = slice(i, i + p + q)
    S[rows, :] = G.T @ S[rows, :]
    S[:, rows] = S[:, rows] @ G
    Z[:, rows] = Z[:, rows] @ G
    S[i + q : i + p + q, i : i + q] = 0.0
    if q == 2:
        _standardize_2x2(S, Z, i, allow_split=False)
    if p == 2:
        _standardize_2x2(S, Z, i + q, allow_split=False)


def reorder_schur(dec: SchurDecomposition, select) -> SchurDecomposition:
    """Reorder a Schur decomposition so the selected blocks come first.

    ``select`` holds indices into ``dec.blocks``.  Selected blocks bubble
    to the leading positions through adjacent swaps, preserving their
    relative order; a decomposition already in the requested order is
    returned unchanged.
    """
    nblocks = len(dec.blocks)
    sel = set()
    for s in select:
        s = int(s)
        if not 0 <= s < nblocks:
            raise ValidationError(f"block index {s} out of range 0..{nblocks - 1}")
        if s in sel:
            raise ValidationError(f"block index {s} selected twice")
        sel.add(s)
    if not sel or sel == set(range(len(sel))):
        return dec
    S = dec.T.T.copy()
    Z = dec.Q.copy()
    seq = [[blk.size, idx in sel] for idx, blk in enumerate(dec.blocks)]
    for target in range(len(sel)):
        j = target
        while not seq[j][1]:
            j += 1
        for jj in range(j, target, -1):
            off = sum(size for size, _ in seq[: jj - 1])
            _swap_adjacent_upper(S, Z, off, seq[jj - 1][0], seq[jj][0])
            seq[jj - 1], seq[jj] = seq[jj], seq[jj - 1]
    return SchurDecomposition(Q=Z, T=S.T.copy(), blocks=_scan_blocks_upper(S))


# ---------------------------------------------------------------------------
# eigenvalue matching and the invariant split


def _match_values(targets, candidates, tol):
    """Match requested values against computed ones, nearest first.

    Returns one candidate index per target.  Raises AmbiguousMatchError
    when more candidates sit inside the tolerance of a requested value than
    that value's multiplicity among the targets, and MatchingError when a
    target has no candidate within tolerance.
    """
    tcount = Counter(targets)
    for t, mult in tcount.items():
        close = sum(1 for c in candidates if abs(c - t) <= tol)
        if close > mult:
            raise AmbiguousMatchError(
                f"{close} computed eigenvalues lie within {tol:.3e} of {t}, "
                f"which appears {mult} time(s) in the request; "
                "the selection is ambiguous"
            )
    pairs = sorted(
        (abs(c - t), ti, ci)
        for ti, t in enumerate(targets)
        for ci, c in enumerate(candidates)
    )
    out = [-1] * len(targets)
    used = set()
    for dist, ti, ci in pairs:
        if dist > tol:
            break
        if out[ti] >= 0 or ci in used:
            continue
        out[ti] = ci
        used.add(ci)
    for ti, ci in enumerate(out):
        if ci < 0:
            near = sorted(candidates, key=lambda c: abs(c - targets[ti]))[:3]
            raise MatchingError(
                f"no computed eigenvalue within {tol:.3e} of {targets[ti]}; "
                f"nearest candidates: {near}"
            )
    return out


def invariant_split(A, moved) -> InvariantSplit:
    """Split state space along the invariant subspace of chosen eigenvalues.

    ``moved`` names eigenvalues of A (matched against the computed
    spectrum within ``1e-6 * max(1, max|A|)``).  The underlying Schur form
    is reordered so those eigenvalues lead, and the orthonormal basis is
    cut after them.  Selecting one half of a complex pair is rejected,
    since no real invariant subspace separates it from its conjugate.
    """
    A = _as_square(A, "A")
    moved = moved if isinstance(moved, Spectrum) else Spectrum(moved)
    n = A.shape[0]
    if not 1 <= len(moved) <= n:
        raise ValidationError(f"moved set has {len(moved)} values, expected 1..{n}")
    dec = real_schur(A)
    flat = [(z, bi) for bi, blk in enumerate(dec.blocks) for z in blk.eigenvalues]
    tol = 1e-6 * max(1.0, max_abs(A))
    matched = _match_values(list(moved), [z for z, _ in flat], tol)
    matched_set = set(matched)
    per_block = Counter(flat[ci][1] for ci in matched)
    for bi, cnt in per_block.items():
        blk = dec.blocks[bi]
        if cnt != blk.size:
            missing = [
                z
                for ci, (z, owner) in enumerate(flat)
                if owner == bi and ci not in matched_set
            ]
            raise ValidationError(
                f"selection splits the conjugate pair {blk.eigenvalues}; "
                f"also move {missing[0]} or drop the pair"
            )
    re = reorder_schur(dec, sorted(per_block))
    r = len(moved)
    moved_out = []
    kept_out = []
    total = 0
    for blk in re.blocks:
        (moved_out if total < r else kept_out).extend(blk.eigenvalues)
        total += blk.size
    return InvariantSplit(
        U=re.Q[:, :r].copy(),
        V=re.Q[:, r:].copy(),
        X=re.T[:r, :r].copy(),
        Y=re.T[r:, r:].copy(),
        moved=Spectrum(moved_out),
        kept=Spectrum(kept_out),
    )
