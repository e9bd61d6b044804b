"""Row-action sweep kernels and a CGLS reference solver.

A sweep projects the iterate onto each row hyperplane a_i^T x = b_i in
turn, scaled by the relaxation parameter omega:

    x <- x + omega * (b_i - a_i^T x) / ||a_i||^2 * a_i.

Variants: ``standard`` visits rows in storage order; ``symmetric`` visits
1..m then m..1 (so the first and last rows are each hit twice per cycle,
which is redundant at omega = 1); ``randomized`` draws m row indices
uniformly with replacement from a seeded generator.

Sweeps are inherently sequential over rows.  Squared row norms are
computed once per solve and shared by all sweeps.  Iterations are never
auto-stopped; ``max_sweeps`` governs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SweepConfig",
    "IterationHistory",
    "row_norms_squared",
    "sweep_standard",
    "sweep_symmetric",
    "sweep_randomized",
    "run",
    "cgls",
]

_VARIANTS = ("standard", "symmetric", "randomized")


@dataclass(frozen=True)
class SweepConfig:
    """Knobs for a row-action solve."""

    omega: float = 1.0
    variant: str = "standard"
    max_sweeps: int = 100
    seed: int = 0
    store_iterates: bool = False

    def __post_init__(self):
        if not 0.0 < self.omega < 2.0:
            raise ValueError("omega must lie in (0, 2)")
        if self.variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}")
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps must be nonnegative")


@dataclass(frozen=True)
class IterationHistory:
    """Per-sweep record including the initial point x0.

    All arrays have length sweep_count + 1.  ``iterates`` and
    ``error_norms`` are optional (the latter requires a reference
    vector).  ``flags`` carries events such as a CGLS breakdown.
    """

    residual_norms: np.ndarray
    sweep_count: int
    iterates: np.ndarray | None = None
    error_norms: np.ndarray | None = None
    flags: tuple = ()

    def write_csv(self, fh) -> None:
        """CSV columns: sweep, residual_norm[, error_norm]."""
        has_err = self.error_norms is not None
        fh.write("sweep,residual_norm" + (",error_norm\n" if has_err else "\n"))
        for k in range(self.sweep_count + 1):
            line = f"{k},{float(self.residual_norms[k])!r}"
            if has_err:
                line += f",{float(self.error_norms[k])!r}"
            fh.write(line + "\n")


def row_norms_squared(A) -> np.ndarray:
    """Squared row norms ||a_i||^2, computed once per solve."""
    A = np.asarray(A, dtype=float)
    rn = np.einsum("ij,ij->i", A, A)
    if np.any(rn == 0.0):
        raise ValueError("matrix has a zero row")
    return rn


def _project_rows(A, b, x, omega, rn, order):
    for i in order:
        ai = A[i]
        x += (omega * (b[i] - ai @ x) / rn[i]) * ai
    return x


def sweep_standard(A, b, x, omega: float, rn=None) -> np.ndarray:
    """One full pass over the rows in storage order.

    Equals x + A^T L^-1 (b - A x) in exact arithmetic.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if rn is None:
        rn = row_norms_squared(A)
    x = np.array(x, dtype=float, copy=True)
    return _project_rows(A, b, x, omega, rn, range(A.shape[0]))


def sweep_symmetric(A, b, x, omega: float, rn=None) -> np.ndarray:
    """A down sweep followed by an up sweep (2m row updates)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if rn is None:
        rn = row_norms_squared(A)
    m = A.shape[0]
    x = np.array(x, dtype=float, copy=True)
    x = _project_rows(A, b, x, omega, rn, range(m))
    return _project_rows(A, b, x, omega, rn, range(m - 1, -1, -1))


def sweep_randomized(A, b, x, omega: float, rng: np.random.Generator, rn=None) -> np.ndarray:
    """m row updates with indices drawn uniformly with replacement.

    Advances ``rng``; pass the same seeded generator across sweeps for a
    reproducible iterate sequence.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if rn is None:
        rn = row_norms_squared(A)
    m = A.shape[0]
    order = rng.integers(0, m, size=m)
    x = np.array(x, dtype=float, copy=True)
    return _project_rows(A, b, x, omega, rn, order)


def run(p, b, cfg: SweepConfig, reference=None) -> IterationHistory:
    """Drive cfg.max_sweeps sweeps on problem p with data b, from x0 = 0.

    Records the residual norm ||b - A x_k|| per sweep, the error norm
    ||x_k - reference|| when a reference is given, and the iterates
    themselves when cfg.store_iterates is set.
    """
    A = np.asarray(p.A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    rn = row_norms_squared(A)
    rng = np.random.default_rng(cfg.seed) if cfg.variant == "randomized" else None

    x = np.zeros(n)
    iterates = [x.copy()] if cfg.store_iterates else None
    residuals = [float(np.linalg.norm(b - A @ x))]
    errors = [float(np.linalg.norm(x - reference))] if reference is not None else None

    for _ in range(cfg.max_sweeps):
        if cfg.variant == "standard":
            x = sweep_standard(A, b, x, cfg.omega, rn)
        elif cfg.variant == "symmetric":
            x = sweep_symmetric(A, b, x, cfg.omega, rn)
        else:
            x = sweep_randomized(A, b, x, cfg.omega, rng, rn)
        residuals.append(float(np.linalg.norm(b - A @ x)))
        if errors is not None:
            errors.append(float(np.linalg.norm(x - reference)))
        if iterates is not None:
            iterates.append(x.copy())

    return IterationHistory(
        residual_norms=np.array(residuals),
        sweep_count=cfg.max_sweeps,
        iterates=np.array(iterates) if iterates is not None else None,
        error_norms=np.array(errors) if errors is not None else None,
    )


def cgls(A, b, k_max: int) -> IterationHistory:
    """Conjugate gradients on the normal equations A^T A x = A^T b, x0 = 0.

    Iterates are always stored.  On breakdown (vanishing direction norm)
    the history is truncated and flagged "breakdown".
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]

    x = np.zeros(n)
    r = b.copy()
    s = A.T @ r
    p = s.copy()
    gamma = float(s @ s)

    iterates = [x.copy()]
    residuals = [float(np.linalg.norm(r))]
    flags = ()
    for _ in range(k_max):
        q = A @ p
        delta = float(q @ q)
        if delta == 0.0 or gamma == 0.0:
            flags = ("breakdown",)
            break
        alpha = gamma / delta
        x = x + alpha * p
        r = r - alpha * q
        s = A.T @ r
        gamma_new = float(s @ s)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
        iterates.append(x.copy())
        residuals.append(float(np.linalg.norm(r)))

    return IterationHistory(
        residual_norms=np.array(residuals),
        sweep_count=len(residuals) - 1,
        iterates=np.array(iterates),
        flags=flags,
    )
