"""Spectrum reports, zero-eigenvalue structure, and spectral-radius bounds.

Everything here concerns the restricted sweep operator G|_V and how its
eigenvalues explain the solver's behavior: the (near-)zero eigenvalues
behind fast initial progress, the eigenvalues close to 1 behind the slow
asymptotic phase, upper bounds on the spectral radius, and the small-omega
regime where the spectrum becomes real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SvdResult, eig_general, solve_lower
from .operator import LFactor, RestrictedOperator, build_L, restrict_to_V

__all__ = [
    "SpectrumReport",
    "StructureReport",
    "BoundsReport",
    "OmegaScanRow",
    "OmegaScan",
    "SymmetricRelations",
    "spectrum",
    "structural_orthogonality",
    "rho_bounds",
    "bauer_fike_bound",
    "backward_error_bound",
    "zero_eigenvalue_condition",
    "small_omega_scan",
    "symmetric_relations",
    "norm_threshold_alpha",
]

#: |Im(lambda)| below which an eigenvalue is treated as numerically real
#: in the small-omega scan.  Large clustered spectra acquire tiny
#: imaginary parts (O(omega^2) couplings) well before the visible
#: real-to-complex transition, so this is deliberately far above eps.
DEFAULT_IM_TOL = 5e-4

#: |lambda| below which an eigenvalue counts as numerically zero.
DEFAULT_ZERO_TOL = 1e-8

#: Eigenvector-matrix condition number beyond which a spectrum is flagged
#: near-defective.
NEAR_DEFECTIVE_KAPPA = 1e12


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of a restricted operator plus summary statistics.

    ``eigenvalues`` are sorted by descending modulus; ``W`` is the lifted
    eigenvector matrix (basis @ C) and ``kappa_W`` the condition number
    of C.  ``zero_count`` counts |lambda| <= zero_tol.
    """

    eigenvalues: np.ndarray
    W: np.ndarray
    kappa_W: float
    rho: float
    zero_count: int
    zero_tol: float
    omega: float
    near_defective: bool = False


@dataclass(frozen=True)
class StructureReport:
    """Exact row-orthogonality structure of A, from sparsity supports.

    ``leading_diag_block`` is the largest k such that the leading k-by-k
    principal submatrix of A A^T is diagonal with *exact* zeros (disjoint
    row supports); ``orth_pairs`` counts all structurally orthogonal row
    pairs; ``near_orth`` is |a_1^T a_2|.
    """

    leading_diag_block: int
    orth_pairs: int
    near_orth: float


@dataclass(frozen=True)
class BoundsReport:
    """Spectral radius, operator norm, and the two closed-form bounds.

    With nu = smallest eigenvalue of the symmetric part of L^-1 (the
    minimum real part of its field of values, positive for omega in
    (0,2)) and sigma_min the smallest retained singular value:

        rho <= 1 - sigma_min^2 / ||L||  <=  1 - nu * sigma_min^2,

    valid when the extremal eigenvalue is simple, real and positive;
    ``assumption_met`` records whether that held (bounds are reported
    either way).  ``bf_bound`` is the eigenvector-conditioned first-order
    bound kappa(X) * |a_1^T a_2| * ||L_1^-1 e_1|| on a second small
    eigenvalue at omega = 1, and ``be_bound`` the pencil backward error
    |1 - 1/omega| * max_i ||a_i||^2.
    """

    rho_actual: float
    norm_G: float
    bound_L: float
    bound_nu: float
    nu: float
    bf_bound: float
    be_bound: float
    sigma_min: float
    norm_L: float
    assumption_met: bool
    omega: float


def spectrum(
    ro: RestrictedOperator, zero_tol: float = DEFAULT_ZERO_TOL
) -> SpectrumReport:
    """Eigendecompose a restricted operator and summarize its spectrum."""
    eig = eig_general(ro.Gv)
    lam = eig.eigenvalues
    rho = float(np.abs(lam[0])) if lam.size else 0.0
    return SpectrumReport(
        eigenvalues=lam,
        W=ro.basis @ eig.eigenvectors,
        kappa_W=eig.kappa,
        rho=rho,
        zero_count=int(np.sum(np.abs(lam) <= zero_tol)),
        zero_tol=float(zero_tol),
        omega=ro.omega,
        near_defective=bool(eig.kappa > NEAR_DEFECTIVE_KAPPA),
    )


def structural_orthogonality(A) -> StructureReport:
    """Report exact row-orthogonality structure from sparsity overlap.

    Two rows with disjoint nonzero supports have a_i^T a_j = 0 exactly,
    also in floating point; the tests here use the supports, never
    floating dot products.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    support = (A != 0.0).astype(np.float64)
    overlap = (support @ support.T) > 0.0

    k = 1
    while k < m and not overlap[k, :k].any():
        k += 1

    iu = np.triu_indices(m, 1)
    orth_pairs = int(np.count_nonzero(~overlap[iu]))
    near = float(abs(A[0] @ A[1])) if m > 1 else 0.0
    return StructureReport(leading_diag_block=k, orth_pairs=orth_pairs, near_orth=near)


def backward_error_bound(A, omega: float) -> float:
    """Pencil backward error |1 - 1/omega| * max_i ||a_i||^2.

    Distance (in the second argument) from (A A^T, L_omega) to a pencil
    with an eigenvalue 1, i.e. from the sweep operator having an exact
    zero eigenvalue; identically 0 at omega = 1.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    A = np.asarray(A, dtype=float)
    rn = np.einsum("ij,ij->i", A, A)
    return float(abs(1.0 - 1.0 / omega) * np.max(rn))


def bauer_fike_bound(A, lf: LFactor, kappa_X: float) -> float:
    """First-order bound kappa(X) * |a_1^T a_2| * ||L^-1 e_1||.

    Bounds the modulus of a second small eigenvalue of the sweep operator
    at omega = 1 in terms of the near-orthogonality of the first two rows;
    ``kappa_X`` is the condition number of the eigenvector matrix of
    L^-1 A A^T.  Exactly zero when the rows are structurally orthogonal.
    """
    A = np.asarray(A, dtype=float)
    if A.shape[0] < 2:
        return 0.0
    e1 = np.zeros(lf.m)
    e1[0] = 1.0
    return float(kappa_X * abs(A[0] @ A[1]) * np.linalg.norm(solve_lower(lf.L, e1)))


def zero_eigenvalue_condition(A) -> float:
    """First-order condition number of the omega = 1 zero eigenvalue.

    The zero eigenvalue of the one-sweep operator has right eigenvector
    a_1 and left eigenvector a_m (first and last rows of A), so its
    standard condition number is ||a_1|| ||a_m|| / |a_m^T a_1|.  Used as
    a computable stand-in for the pencil eigenvalue condition number in
    the backward-error bound; only first-order accurate.
    """
    A = np.asarray(A, dtype=float)
    a1, am = A[0], A[-1]
    denom = abs(am @ a1)
    if denom == 0.0:
        return np.inf
    return float(np.linalg.norm(a1) * np.linalg.norm(am) / denom)


def rho_bounds(
    A,
    sv: SvdResult,
    lf: LFactor,
    ro: RestrictedOperator,
    report: SpectrumReport | None = None,
) -> BoundsReport:
    """Evaluate the spectral radius against its closed-form upper bounds.

    Cost note: the inverse of L is formed explicitly (m triangular
    solves) to get the smallest eigenvalue of its symmetric part; intended
    for desk-scale m (<= 4096).  When the extremal eigenvalue is complex
    or multiple the bounds are still reported but flagged as outside the
    proposition's assumptions.
    """
    A = np.asarray(A, dtype=float)
    if report is None:
        report = spectrum(ro)
    lam = report.eigenvalues
    rho = report.rho

    top = lam[0]
    simple = lam.size < 2 or abs(lam[0] - lam[1]) > 1e-12 * max(1.0, abs(top))
    assumption_met = bool(
        abs(top.imag) <= 1e-12 * max(1.0, abs(top)) and top.real > 0.0 and simple
    )

    norm_G = float(np.linalg.norm(ro.Gv, 2))
    sigma_min = float(sv.S[-1])
    norm_L = float(np.linalg.norm(lf.L, 2))
    L_inv = solve_lower(lf.L, np.eye(lf.m))
    nu = float(np.linalg.eigvalsh(0.5 * (L_inv + L_inv.T))[0])

    lf1 = lf if lf.omega == 1.0 else build_L(A, 1.0)
    kappa_X = eig_general(solve_lower(lf1.L, A @ A.T)).kappa
    return BoundsReport(
        rho_actual=rho,
        norm_G=norm_G,
        bound_L=float(1.0 - sigma_min**2 / norm_L),
        bound_nu=float(1.0 - nu * sigma_min**2),
        nu=nu,
        bf_bound=bauer_fike_bound(A, lf1, kappa_X),
        be_bound=backward_error_bound(A, lf.omega),
        sigma_min=sigma_min,
        norm_L=norm_L,
        assumption_met=assumption_met,
        omega=lf.omega,
    )


@dataclass(frozen=True)
class OmegaScanRow:
    omega: float
    rho: float
    max_im: float
    zero_count: int
    n_nonpos_real: int
    min_abs: float


@dataclass(frozen=True)
class OmegaScan:
    """Per-omega spectrum statistics over an ascending omega grid.

    ``omega0`` is the largest scanned omega below the first omega whose
    spectrum has max |Im(lambda)| > im_tol, i.e. the detected edge of the
    all-real region (None when the very first point is already complex).
    """

    rows: tuple
    im_tol: float
    zero_tol: float

    @property
    def omega0(self) -> float | None:
        prev = None
        for row in self.rows:
            if row.max_im > self.im_tol:
                return prev
            prev = row.omega
        return prev


def small_omega_scan(
    A,
    sv: SvdResult,
    omegas,
    zero_tol: float = DEFAULT_ZERO_TOL,
    im_tol: float = DEFAULT_IM_TOL,
) -> OmegaScan:
    """Scan the restricted spectrum over a grid of relaxation parameters.

    For each omega (sorted ascending) the restricted operator is rebuilt
    and its eigenvalues (no eigenvectors) classified: largest modulus,
    largest |imaginary part|, count of numerically zero eigenvalues, and
    count of eigenvalues with nonpositive real part.
    """
    A = np.asarray(A, dtype=float)
    rows = []
    for omega in sorted(float(w) for w in omegas):
        ro = restrict_to_V(A, build_L(A, omega), sv)
        lam = np.linalg.eigvals(ro.Gv)
        rows.append(
            OmegaScanRow(
                omega=omega,
                rho=float(np.max(np.abs(lam))),
                max_im=float(np.max(np.abs(lam.imag))),
                zero_count=int(np.sum(np.abs(lam) <= zero_tol)),
                n_nonpos_real=int(np.sum(lam.real <= 0.0)),
                min_abs=float(np.min(np.abs(lam))),
            )
        )
    return OmegaScan(rows=tuple(rows), im_tol=float(im_tol), zero_tol=float(zero_tol))


@dataclass(frozen=True)
class SymmetricRelations:
    """Spectral statistics tying the double sweep to the single sweep."""

    rho_G: float
    rho_Gs: float
    norm_G: float
    norm_G_squared: float
    difference: float
    max_all: float


def symmetric_relations(
    ro_G: RestrictedOperator, ro_Gs: RestrictedOperator
) -> SymmetricRelations:
    """Check rho of the double-sweep operator against ||G|_V||^2.

    Both restrictions must come from the same matrix and omega; the
    double-sweep restriction is assembled through the two sweeps, so the
    reported ``difference`` is a genuine numerical cross-check rather
    than an algebraic identity.
    """
    if ro_G.omega != ro_Gs.omega:
        raise ValueError("restricted operators use different omega")
    rho_G = float(np.max(np.abs(np.linalg.eigvals(ro_G.Gv))))
    rho_Gs = float(np.max(np.abs(np.linalg.eigvals(ro_Gs.Gv))))
    norm_G = float(np.linalg.norm(ro_G.Gv, 2))
    return SymmetricRelations(
        rho_G=rho_G,
        rho_Gs=rho_Gs,
        norm_G=norm_G,
        norm_G_squared=norm_G**2,
        difference=abs(rho_Gs - norm_G**2),
        max_all=max(rho_G, rho_Gs, norm_G),
    )


def norm_threshold_alpha(
    diag=(0.99, 0.98), alpha_hi: float = 1.0, tol: float = 1e-6
) -> float:
    """Bisect for the alpha where ||[[d1, alpha], [0, d2]]|| reaches 1.

    The 2-by-2 upper-triangular miniature of a mildly nonnormal sweep
    operator: spectral radius d1 < 1 for every alpha, yet the norm (and
    with it the double-sweep spectral radius, which equals the squared
    norm) exceeds 1 once alpha passes this threshold.
    """
    d1, d2 = diag

    def norm2(alpha):
        return np.linalg.norm(np.array([[d1, alpha], [0.0, d2]]), 2)

    lo, hi = 0.0, alpha_hi
    if norm2(lo) >= 1.0 or norm2(hi) <= 1.0:
        raise ValueError("threshold not bracketed by [0, alpha_hi]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if norm2(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
