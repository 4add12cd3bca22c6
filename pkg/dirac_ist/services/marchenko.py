"""Marchenko-type integral equations and potential reconstruction.

For a node with characteristic coordinates (xi0, eta0) the unknowns A = (A1, A2) live on
eta >= eta0 and B = (B1, B2) on xi <= xi0:

    A_i(eta) - int_{eta' >= eta0} A_i(eta') k(eta', eta) deta' = F_i3(xi0, eta)
    k(eta', eta) = int_{xi <= xi0} sum_j G_3j(eta', xi) F_j3(xi, eta) dxi

    B_j(xi) - sum_i int_{xi' <= xi0} B_i(xi') K_ij(xi', xi) dxi' = G_3j(eta0, xi)
    K_ij(xi', xi) = int_{eta >= eta0} F_i3(xi', eta) G_3j(eta, xi) deta

Integrals are trapezoid sums on the kernel axis, truncated to the table window. The potential
is read off the diagonals: q1,2 from A at eta0 and q3,4 from B at xi0.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from dirac_ist.core.exceptions import InversionBreakdownException, ValidationException
from dirac_ist.core.logging import get_logger
from dirac_ist.core.parallel import parallel_map
from dirac_ist.models.fields import Grid2D, KernelAxis, Potential, characteristic_coords
from dirac_ist.models.schemas import ConditionSummary
from dirac_ist.services.direct_scattering import ScatteringData

logger = get_logger(__name__)

SolveMethod = Literal["dense", "reduced"]

# Convention constants: q1,2 = A_DIAGONAL_FACTOR * A_1,2(eta0), q3,4 = B_DIAGONAL_FACTOR * B_1,2(xi0)
# for the kernel orientation F13 ~ +q1/2, G31 ~ -q3/2 produced by direct_scattering.
A_DIAGONAL_FACTOR = 2.0
B_DIAGONAL_FACTOR = -2.0

DEFAULT_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class NystromResult:
    """Solution of one Nyström system on the full kernel axis."""

    values: np.ndarray
    rcond: float
    residual: float

    @property
    def cond(self) -> float:
        return float("inf") if self.rcond == 0.0 else 1.0 / self.rcond


@dataclass(frozen=True, eq=False)
class MarchenkoSolution:
    """A and B along one grid column x = x_i.

    ``a_diag[j]`` and ``b_diag[j]`` hold A(eta0) and B(xi0) at node (i, j). The full profiles
    ``a`` and ``b`` of shape (n, 2, m) are only kept on request.
    """

    x: float
    axis: KernelAxis
    a_diag: np.ndarray
    b_diag: np.ndarray
    rcond: np.ndarray
    residual: np.ndarray
    a: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class ReconstructionStats:
    """Per-node condition estimates and residuals of a reconstruction."""

    grid: Grid2D
    method: str
    cond: np.ndarray
    residual: np.ndarray

    def summary(self) -> ConditionSummary:
        return ConditionSummary(
            method=self.method,
            nodes=int(self.cond.size),
            cond_min=float(np.min(self.cond)),
            cond_max=float(np.max(self.cond)),
            cond_median=float(np.median(self.cond)),
            residual_max=float(np.max(self.residual)),
        )


def trapezoid_weights(m: int, lo: int, hi: int, h: float) -> np.ndarray:
    """Trapezoid weights on nodes ``lo..hi`` of an m-node axis, zero elsewhere."""
    w = np.zeros(m)
    if hi > lo:
        w[lo:hi + 1] = h
        w[lo] = w[hi] = 0.5 * h
    return w


def lattice_node(axis: KernelAxis, x: float, y: float) -> Tuple[int, int]:
    """Kernel-axis indices (a0, b0) of the characteristic coordinates of (x, y)."""
    xi, eta = characteristic_coords(x, y)
    fa = (xi - axis.c_min) / axis.h
    fb = (eta - axis.c_min) / axis.h
    a0, b0 = int(round(fa)), int(round(fb))
    if abs(fa - a0) > 1e-9 or abs(fb - b0) > 1e-9:
        raise ValidationException("Point is not on the characteristic lattice", details={"x": x, "y": y})
    if not (0 <= a0 < axis.m and 0 <= b0 < axis.m):
        raise ValidationException("Point lies outside the kernel window", details={"x": x, "y": y})
    return a0, b0


def _factor(matrix: np.ndarray, cond_limit: float, where: dict) -> Tuple[tuple, float]:
    """LU factors and reciprocal 1-norm condition estimate; raises above ``cond_limit``."""
    lange, gecon = get_lapack_funcs(("lange", "gecon"), (matrix,))
    anorm = lange("1", matrix)
    lu, piv = lu_factor(matrix, check_finite=False)
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond * cond_limit < 1.0:
        cond = float("inf") if rcond == 0.0 else float(1.0 / rcond)
        raise InversionBreakdownException(
            "Nyström system is singular or too ill-conditioned",
            details={**where, "cond": cond, "cond_limit": cond_limit}
        )
    return (lu, piv), float(rcond)


def _residual(matrix: np.ndarray, solution: np.ndarray, rhs: np.ndarray) -> float:
    return float(np.max(np.abs(matrix @ solution - rhs))) if rhs.size else 0.0


def _a_matrix(k: np.ndarray, w: np.ndarray) -> np.ndarray:
    """I - k^T diag(w): entry [b, b'] = delta - k[b', b] w[b']."""
    return np.eye(k.shape[0]) - (k * w[:, None]).T


def _b_matrix(kb: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Coupled matrix for B on blocks (j, xi) x (i, xi'): delta - w[xi'] K_ij[xi', xi]."""
    m = w.size
    out = np.eye(2 * m, dtype=complex)
    for i in range(2):
        for j in range(2):
            out[j * m:(j + 1) * m, i * m:(i + 1) * m] -= (kb[i, j] * w[:, None]).T
    return out


def _outer_f_g(scat: ScatteringData, a: int) -> np.ndarray:
    """Integrand of k at one xi node: sum_j G_3j(:, a) F_j3(a, :)."""
    return np.outer(scat.g31[:, a], scat.f13[a, :]) + np.outer(scat.g32[:, a], scat.f23[a, :])


def _outer_g_f(scat: ScatteringData, b: int) -> np.ndarray:
    """Integrand of K at one eta node: F_i3(:, b) G_3j(b, :) for all (i, j), shape (2, 2, m, m)."""
    f = (scat.f13[:, b], scat.f23[:, b])
    g = (scat.g31[b, :], scat.g32[b, :])
    return np.array([[np.outer(f[i], g[j]) for j in range(2)] for i in range(2)])


def _k_full(scat: ScatteringData, a0: int) -> np.ndarray:
    wb = trapezoid_weights(scat.axis.m, 0, a0, scat.axis.h)
    return (scat.g31 * wb) @ scat.f13 + (scat.g32 * wb) @ scat.f23


def _kb_full(scat: ScatteringData, b0: int) -> np.ndarray:
    m = scat.axis.m
    wa = trapezoid_weights(m, b0, m - 1, scat.axis.h)
    f = (scat.f13, scat.f23)
    g = (scat.g31, scat.g32)
    return np.array([[(f[i] * wa) @ g[j] for j in range(2)] for i in range(2)])


def assemble_kernel(scat: ScatteringData, x: float, y: float) -> np.ndarray:
    """Scalar kernel k(eta', eta) of the A equation at (x, y).

    Args:
        scat: Scattering data
        x: Physical abscissa
        y: Physical ordinate

    Returns:
        (m, m) table, rows eta', columns eta; rows below eta0 are zero
    """
    a0, b0 = lattice_node(scat.axis, x, y)
    k = _k_full(scat, a0)
    k[:b0] = 0.0
    return k


def solve_marchenko_A(
    scat: ScatteringData,
    x: float,
    y: float,
    cond_limit: float = DEFAULT_COND_LIMIT,
) -> NystromResult:
    """Solve for A(x, y, .) on the full kernel axis.

    Both components share the matrix I - k^T W; they differ only in the right-hand side.

    Args:
        scat: Scattering data
        x: Physical abscissa
        y: Physical ordinate
        cond_limit: Largest accepted 1-norm condition estimate

    Returns:
        Values of shape (2, m)
    """
    a0, b0 = lattice_node(scat.axis, x, y)
    m, h = scat.axis.m, scat.axis.h
    k = assemble_kernel(scat, x, y)
    matrix = _a_matrix(k, trapezoid_weights(m, b0, m - 1, h))
    rhs = np.stack([scat.f13[a0, :], scat.f23[a0, :]], axis=1)
    factors, rcond = _factor(matrix, cond_limit, {"x": x, "y": y, "equation": "A"})
    sol = lu_solve(factors, rhs, check_finite=False)
    return NystromResult(sol.T, rcond, _residual(matrix, sol, rhs))


def solve_marchenko_B(
    scat: ScatteringData,
    x: float,
    y: float,
    cond_limit: float = DEFAULT_COND_LIMIT,
    method: SolveMethod = "dense",
) -> NystromResult:
    """Solve for B(x, y, .) on the full kernel axis.

    ``dense`` solves the coupled 2m system in (B1, B2). ``reduced`` substitutes the B equation
    into itself: v = sum_i int B_i F_i3 solves the A-equation matrix with right-hand side
    k(eta0, .), after which B follows by one quadrature.

    Args:
        scat: Scattering data
        x: Physical abscissa
        y: Physical ordinate
        cond_limit: Largest accepted 1-norm condition estimate
        method: "dense" or "reduced"

    Returns:
        Values of shape (2, m)
    """
    a0, b0 = lattice_node(scat.axis, x, y)
    m, h = scat.axis.m, scat.axis.h
    wa = trapezoid_weights(m, b0, m - 1, h)
    g = np.stack([scat.g31, scat.g32])
    where = {"x": x, "y": y, "equation": "B", "method": method}

    if method == "dense":
        wb = trapezoid_weights(m, 0, a0, h)
        matrix = _b_matrix(_kb_full(scat, b0), wb)
        rhs = np.concatenate([g[0, b0, :], g[1, b0, :]])
        factors, rcond = _factor(matrix, cond_limit, where)
        sol = lu_solve(factors, rhs, check_finite=False)
        return NystromResult(sol.reshape(2, m), rcond, _residual(matrix, sol, rhs))

    if method == "reduced":
        k = assemble_kernel(scat, x, y)
        matrix = _a_matrix(k, wa)
        rhs = np.array(k[b0, :])
        factors, rcond = _factor(matrix, cond_limit, where)
        v = lu_solve(factors, rhs, check_finite=False)
        values = g[:, b0, :] + np.einsum("b,jba->ja", wa * v, g)
        return NystromResult(values, rcond, _residual(matrix, v, rhs))

    raise ValidationException(f"Unknown Marchenko method {method!r}", details={"method": method})


def solve_marchenko_column(
    scat: ScatteringData,
    i: int,
    method: SolveMethod = "reduced",
    cond_limit: float = DEFAULT_COND_LIMIT,
    keep_profiles: bool = False,
) -> MarchenkoSolution:
    """Solve both equations at every node of grid column ``i``.

    Moving up the column shifts xi0 and eta0 by one node each, so k and K change by a single
    trapezoid panel per step and are updated in place. Only the active window (eta >= eta0 for
    A, xi <= xi0 for B) enters the linear systems; the remaining entries follow explicitly.

    Args:
        scat: Scattering data on a kernel axis covering ``scat.grid``
        i: Column index
        method: B-equation solver
        cond_limit: Largest accepted condition estimate
        keep_profiles: Also return A and B on the full axis

    Returns:
        Column solution
    """
    grid = scat.grid
    axis = scat.axis
    m, h, n = axis.m, axis.h, grid.n
    off_xi, off_eta = axis.grid_offsets(grid)
    axis.lattice_indices(grid)
    if method not in ("dense", "reduced"):
        raise ValidationException(f"Unknown Marchenko method {method!r}", details={"method": method})

    f = np.stack([scat.f13, scat.f23])
    g = np.stack([scat.g31, scat.g32])

    a_diag = np.zeros((n, 2), dtype=complex)
    b_diag = np.zeros((n, 2), dtype=complex)
    rcond = np.zeros(n)
    residual = np.zeros(n)
    a_prof = np.zeros((n, 2, m), dtype=complex) if keep_profiles else None
    b_prof = np.zeros((n, 2, m), dtype=complex) if keep_profiles else None

    a0, b0 = off_xi + i, off_eta - i
    k = _k_full(scat, a0)
    kb = _kb_full(scat, b0) if method == "dense" else None

    for j in range(n):
        if j > 0:
            k += 0.5 * h * (_outer_f_g(scat, a0) + _outer_f_g(scat, a0 + 1))
            if kb is not None:
                kb -= 0.5 * h * (_outer_g_f(scat, b0) + _outer_g_f(scat, b0 + 1))
            a0, b0 = a0 + 1, b0 + 1
        where = {"column": i, "row": j, "x": float(grid.x[i]), "y": float(grid.y[j])}

        # A on eta >= eta0
        wa = trapezoid_weights(m, b0, m - 1, h)[b0:]
        matrix_a = _a_matrix(k[b0:, b0:], wa)
        rhs_a = f[:, a0, b0:].T
        factors, rc_a = _factor(matrix_a, cond_limit, {**where, "equation": "A"})
        sol_a = lu_solve(factors, rhs_a, check_finite=False)
        res = _residual(matrix_a, sol_a, rhs_a)
        a_diag[j] = sol_a[0]

        if method == "reduced":
            rhs_v = np.array(k[b0, b0:])
            v = lu_solve(factors, rhs_v, check_finite=False)
            res = max(res, _residual(matrix_a, v, rhs_v))
            b_row = g[:, b0, :] + np.einsum("b,jba->ja", wa * v, g[:, b0:, :])
            b_diag[j] = b_row[:, a0]
            rc = rc_a
        else:
            wb = trapezoid_weights(m, 0, a0, h)[:a0 + 1]
            matrix_b = _b_matrix(kb[:, :, :a0 + 1, :a0 + 1], wb)
            rhs_b = g[:, b0, :a0 + 1].reshape(-1)
            factors_b, rc_b = _factor(matrix_b, cond_limit, {**where, "equation": "B"})
            sol_b = lu_solve(factors_b, rhs_b, check_finite=False).reshape(2, a0 + 1)
            res = max(res, _residual(matrix_b, sol_b.reshape(-1), rhs_b))
            b_diag[j] = sol_b[:, a0]
            rc = min(rc_a, rc_b)
            if keep_profiles:
                b_row = g[:, b0, :] + np.einsum("ia,ijax->jx", sol_b * wb, kb[:, :, :a0 + 1, :])
                b_row[:, :a0 + 1] = sol_b

        rcond[j] = rc
        residual[j] = res
        if keep_profiles:
            a_row = f[:, a0, :] + (sol_a.T * wa) @ k[b0:, :]
            a_row[:, b0:] = sol_a.T
            a_prof[j] = a_row
            b_prof[j] = b_row

    return MarchenkoSolution(
        x=float(grid.x[i]),
        axis=axis,
        a_diag=a_diag,
        b_diag=b_diag,
        rcond=rcond,
        residual=residual,
        a=a_prof,
        b=b_prof,
    )


def reconstruct_potential(
    scat: ScatteringData,
    grid: Optional[Grid2D] = None,
    method: SolveMethod = "reduced",
    cond_limit: float = DEFAULT_COND_LIMIT,
    threads: int = 1,
) -> Tuple[Potential, ReconstructionStats]:
    """Recover q1..q4 on the grid from scattering data.

    Args:
        scat: Scattering data
        grid: Target grid; must be the grid the data was computed on
        method: B-equation solver
        cond_limit: Largest accepted condition estimate
        threads: Worker threads over grid columns

    Returns:
        Potential and per-node conditioning
    """
    grid = grid or scat.grid
    if grid != scat.grid:
        raise ValidationException("Reconstruction grid differs from the scattering grid")

    columns: List[MarchenkoSolution] = parallel_map(
        lambda i: solve_marchenko_column(scat, i, method, cond_limit),
        list(range(grid.n)),
        threads,
    )
    a = np.stack([c.a_diag for c in columns])
    b = np.stack([c.b_diag for c in columns])
    pot = Potential(
        grid,
        A_DIAGONAL_FACTOR * a[:, :, 0],
        A_DIAGONAL_FACTOR * a[:, :, 1],
        B_DIAGONAL_FACTOR * b[:, :, 0],
        B_DIAGONAL_FACTOR * b[:, :, 1],
    )
    # every accepted system has rcond >= 1 / cond_limit > 0
    cond = 1.0 / np.stack([c.rcond for c in columns])
    stats = ReconstructionStats(grid, method, cond, np.stack([c.residual for c in columns]))

    summary = stats.summary()
    logger.info(
        "Potential reconstructed",
        extra={"n": grid.n, "m": scat.axis.m, "method": method, "cond_max": summary.cond_max,
               "residual_max": summary.residual_max}
    )
    return pot, stats


def write_diagnostics(path: Path, stats: ReconstructionStats) -> Path:
    """Per-node condition estimate and residual as a text table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    X, Y = stats.grid.mesh()
    i, j = np.meshgrid(np.arange(stats.grid.n), np.arange(stats.grid.n), indexing="ij")
    rows = np.column_stack([i.ravel(), j.ravel(), X.ravel(), Y.ravel(), stats.cond.ravel(), stats.residual.ravel()])
    np.savetxt(path, rows, fmt=["%d", "%d", "%.17g", "%.17g", "%.6e", "%.6e"], header="i j x y cond residual")
    return path
