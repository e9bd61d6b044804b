"""The sweep iteration operator and its relatives.

One full row-action sweep over A x = b with relaxation omega is the affine
map x -> x + A^T L^-1 (b - A x), where

    L = L_omega = strict_lower(A A^T) + (1/omega) * diag(||a_i||^2).

The error therefore propagates through G = I - A^T L^-1 A (down sweep) and
G^T = I - A^T L^-T A (up sweep).  Since all iterates from x0 = 0 live in
the row space V = range(A^T), the object of interest is the restriction
G|_V, realized here as the dense r-by-r matrix V^T G V built on the
orthonormal SVD basis V.

G itself is never formed as an n-by-n dense matrix when applications
suffice; the restricted matrix is the only dense operator-level object.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .linalg import SvdResult, eig_general, solve_lower, solve_upper, svd
from .problems import TestProblem

__all__ = [
    "LFactor",
    "RestrictedOperator",
    "SharpMaps",
    "build_L",
    "apply_G",
    "apply_Gt",
    "apply_Gs",
    "restrict_to_V",
    "restrict_symmetric_to_V",
    "sharp_maps",
    "fixed_point",
    "apply_Ak_sharp",
    "convergence_conditions",
]


@dataclass(frozen=True)
class LFactor:
    """Lower-triangular sweep factor L = strict_lower(AA^T) + D/omega."""

    L: np.ndarray
    omega: float
    D_diag: np.ndarray

    @property
    def m(self) -> int:
        return self.L.shape[0]


@dataclass(frozen=True)
class RestrictedOperator:
    """Dense restriction basis^T G basis of an iteration operator.

    ``basis`` is the orthonormal V factor of the problem's SVD, so for a
    full-column-rank A the restriction is similar to the operator itself.
    ``kind`` distinguishes the one-sweep operator ("standard") from the
    down-up double sweep ("symmetric").
    """

    Gv: np.ndarray
    basis: np.ndarray
    omega: float
    kind: str = "standard"

    @property
    def r(self) -> int:
        return self.Gv.shape[0]

    def write_csv(self, fh) -> None:
        """Dump the dense restricted matrix; columns i, j, value."""
        fh.write("i,j,value\n")
        for i in range(self.Gv.shape[0]):
            for j in range(self.Gv.shape[1]):
                fh.write(f"{i},{j},{float(self.Gv[i, j])!r}\n")


def build_L(A, omega: float) -> LFactor:
    """Assemble the sweep factor for a given relaxation parameter.

    Solver use requires 0 < omega < 2; construction is allowed for any
    omega > 0 so the operator can be analyzed outside the convergent
    range.  L is nonsingular exactly when A has no zero rows.
    """
    A = np.asarray(A, dtype=float)
    if omega <= 0:
        raise ValueError("omega must be positive")
    AAT = A @ A.T
    d = np.diag(AAT).copy()
    if np.any(d == 0.0):
        raise ValueError("matrix has a zero row; L would be singular")
    L = np.tril(AAT, -1) + np.diag(d / omega)
    return LFactor(L=L, omega=float(omega), D_diag=d)


def apply_G(lf: LFactor, A, x) -> np.ndarray:
    """Apply G = I - A^T L^-1 A to a vector or to columns of a matrix."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    return x - A.T @ solve_lower(lf.L, A @ x)


def apply_Gt(lf: LFactor, A, x) -> np.ndarray:
    """Apply the up-sweep operator G^T = I - A^T L^-T A."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    return x - A.T @ solve_upper(lf.L.T, A @ x)


def apply_Gs(lf: LFactor, A, x) -> np.ndarray:
    """Apply the symmetric-sweep operator G^T G (down sweep, then up)."""
    return apply_Gt(lf, A, apply_G(lf, A, x))


def restrict_to_V(A, lf: LFactor, sv: SvdResult) -> RestrictedOperator:
    """Restriction V^T G V of the one-sweep operator to the row space.

    Assembled blockwise as V^T (V - A^T L^-1 (A V)); one triangular solve
    with r right-hand sides.
    """
    V = sv.V
    GV = apply_G(lf, A, V)
    return RestrictedOperator(Gv=V.T @ GV, basis=V, omega=lf.omega, kind="standard")


def restrict_symmetric_to_V(A, lf: LFactor, sv: SvdResult) -> RestrictedOperator:
    """Restriction V^T (G^T G) V, assembled through the two sweeps.

    Deliberately computed by applying the down sweep then the up sweep
    rather than by squaring the restricted one-sweep matrix, so it can
    serve as an independent cross-check of norm/spectral identities.
    """
    V = sv.V
    GsV = apply_Gt(lf, A, apply_G(lf, A, V))
    return RestrictedOperator(Gv=V.T @ GsV, basis=V, omega=lf.omega, kind="symmetric")


@dataclass(frozen=True)
class SharpMaps:
    """Spectral machinery for the fixed-point map and its k-sweep truncation.

    The fixed point of the sweep iteration is x = (M|_V)^-1 B b where
    M = A^T L^-1 A and B = A^T L^-1 for the standard sweep (for the
    symmetric variant, M = A^T S A and B = A^T S with the SPD weight
    S = (2/omega - 1) L^-T D L^-1).  After k sweeps from x0 = 0 the
    iterate is (I - G^k) applied to the fixed point, evaluated here in
    the eigenbasis W = V C of the restricted operator:

        x_k = W (I - Lambda^k) W^+ x_infinity,   W^+ = C^-1 V^T.

    ``lam`` holds the eigenvalues (descending modulus), ``W`` the lifted
    eigenvectors, ``W_inv`` the left inverse of W on the row space, and
    ``kappa_W`` the condition number of C.
    """

    A: np.ndarray
    lf: LFactor
    sv: SvdResult
    variant: str
    lam: np.ndarray
    C: np.ndarray
    W: np.ndarray
    W_inv: np.ndarray
    kappa_W: float
    ro: RestrictedOperator = field(repr=False)

    @property
    def r(self) -> int:
        return self.lam.size

    def apply_B(self, e) -> np.ndarray:
        """Apply B (= A^T L^-1 for the standard sweep) to data-space vectors."""
        e = np.asarray(e, dtype=float)
        if self.variant == "standard":
            return self.A.T @ solve_lower(self.lf.L, e)
        y = solve_lower(self.lf.L, e)
        y = (2.0 / self.lf.omega - 1.0) * (self.lf.D_diag * y.T).T
        return self.A.T @ solve_upper(self.lf.L.T, y)

    def apply_A_sharp(self, e) -> np.ndarray:
        """Fixed-point map: least-norm limit of the sweeps on data e."""
        y = self.apply_B(e)
        V = self.sv.V
        coeff = np.linalg.solve(np.eye(self.r) - self.ro.Gv, V.T @ y)
        return V @ coeff

    def a_sharp_matrix(self) -> np.ndarray:
        """The n-by-m fixed-point matrix, formed explicitly (desk scale)."""
        return self.apply_A_sharp(np.eye(self.lf.m))


def sharp_maps(
    A,
    lf: LFactor,
    sv: SvdResult,
    variant: str = "standard",
    convergence_tol: float = 1e-12,
) -> SharpMaps:
    """Eigendecompose the restricted operator and package the sharp maps.

    Raises NumericalError("non-convergent mode") when some eigenvalue is
    within ``convergence_tol`` of 1, since then I - G is not invertible
    on the row space and the fixed point is undefined.
    """
    if variant not in ("standard", "symmetric"):
        raise ValueError(f"unknown variant {variant!r}")
    A = np.asarray(A, dtype=float)
    restrict = restrict_to_V if variant == "standard" else restrict_symmetric_to_V
    ro = restrict(A, lf, sv)
    eig = eig_general(ro.Gv)
    lam, C = eig.eigenvalues, eig.eigenvectors
    if np.min(np.abs(1.0 - lam)) < convergence_tol:
        raise NumericalError("non-convergent mode: eigenvalue at 1")
    W = sv.V @ C
    W_inv = np.linalg.solve(C, sv.V.T.astype(complex))
    return SharpMaps(
        A=A,
        lf=lf,
        sv=sv,
        variant=variant,
        lam=lam,
        C=C,
        W=W,
        W_inv=W_inv,
        kappa_W=eig.kappa,
        ro=ro,
    )


def apply_Ak_sharp(sm: SharpMaps, e, k: int) -> np.ndarray:
    """Map data e to the k-sweep iterate (I - G^k) applied to the limit.

    Evaluated spectrally as W (I - Lambda^k) W^+ (limit of e); k = 0
    yields the zero vector and k -> infinity approaches the fixed point.
    The result is real; the imaginary round-off from the complex
    eigenbasis is discarded.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    x_inf = sm.apply_A_sharp(e)
    phi = 1.0 - sm.lam**k
    coeff = sm.W_inv @ x_inf.astype(complex)
    scaled = phi * coeff if coeff.ndim == 1 else phi[:, None] * coeff
    return np.real(sm.W @ scaled)


def fixed_point(
    p: TestProblem,
    b,
    omega: float = 1.0,
    rank_tol: float | None = None,
    sm: SharpMaps | None = None,
) -> np.ndarray:
    """Limit of the sweep iteration from x0 = 0 with data b.

    For consistent (noise-free) b this is the unique least-norm solution
    of A x = b, independent of omega.  For noisy b the same spectral
    formula is evaluated; that limit is reported in outputs under the
    label ``kaczmarz_limit``.
    """
    if sm is None:
        sv = svd(p.A, rank_tol)
        sm = sharp_maps(p.A, build_L(p.A, omega), sv)
    return sm.apply_A_sharp(np.asarray(b, dtype=float))


def convergence_conditions(A, omega: float, rank_tol: float | None = None) -> dict:
    """Evaluate five equivalent spectral convergence conditions.

    Each entry states, in a different algebraic form, that the sweep
    iteration contracts on the relevant invariant subspace:

    a. rho((A^T L^-1 A - I)|_V) < 1       (row space V = range(A^T))
    b. rho((L^-1 A A^T - I)|_U) < 1       (column space U = range(A))
    c. rho((A A^T L^-1 - I)|_{L U}) < 1
    d. generalized pencil (A A^T - L, L) restricted to U has radius < 1
    e. pencil (A A^T, L) restricted to U has spectrum in the open disk
       of center 1 and radius 1.

    The pencil eigenvalues for (d) and (e) are computed as eigenvalues of
    the restriction of L^-1 A A^T to U, using the SVD's U factor as the
    orthonormal basis; the mathematical statements are basis-independent.
    Returns the five booleans plus the computed radii and pencil spectrum.
    """
    A = np.asarray(A, dtype=float)
    sv = svd(A, rank_tol)
    lf = build_L(A, omega)
    V, U = sv.V, sv.U
    AAT = A @ A.T

    rho_a = np.max(np.abs(eig_general(V.T @ (A.T @ solve_lower(lf.L, A @ V)) - np.eye(sv.rank)).eigenvalues))
    MU = solve_lower(lf.L, AAT @ U)
    rho_b = np.max(np.abs(eig_general(U.T @ MU - np.eye(sv.rank)).eigenvalues))
    Q, _ = np.linalg.qr(lf.L @ U)
    rho_c = np.max(np.abs(eig_general(Q.T @ (AAT @ solve_lower(lf.L, Q)) - np.eye(sv.rank)).eigenvalues))
    pencil = eig_general(U.T @ MU).eigenvalues
    rho_d = np.max(np.abs(pencil - 1.0))

    return {
        "a": bool(rho_a < 1.0),
        "b": bool(rho_b < 1.0),
        "c": bool(rho_c < 1.0),
        "d": bool(rho_d < 1.0),
        "e": bool(np.all(np.abs(pencil - 1.0) < 1.0)),
        "rho_a": float(rho_a),
        "rho_b": float(rho_b),
        "rho_c": float(rho_c),
        "rho_d": float(rho_d),
        "pencil_eigenvalues": pencil,
    }
