"""Residual checks of the Lax pair

    L = d/dy - sigma d/dx - Q,    A = d/dt - tau d/dx - P,

the algebraic constraint [sigma, P] = [tau, Q], and the statement that A maps solutions of
L psi = 0 to solutions. All derivatives are central differences (``np.gradient``) and residuals
are max-norms over interior nodes.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from dirac_ist.core.exceptions import ValidationException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import SIGMA, AsymptoticProfile, Grid2D, KernelAxis, LaxParameters, Potential
from dirac_ist.services.direct_scattering import propagate
from dirac_ist.services.threewave import AuxiliaryFields, compute_aux

logger = get_logger(__name__)

DEFAULT_BAND = 3


def q_matrix(pot: Potential) -> np.ndarray:
    n = pot.grid.n
    q = np.zeros((3, 3, n, n), dtype=complex)
    q[0, 2], q[1, 2], q[2, 0], q[2, 1] = pot.q1, pot.q2, pot.q3, pot.q4
    return q


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """Q and P at one instant."""

    params: LaxParameters
    pot: Potential
    aux: AuxiliaryFields
    p_override: Optional[np.ndarray] = None

    def q_matrix(self) -> np.ndarray:
        """Q as a (3, 3, n, n) array."""
        return q_matrix(self.pot)

    def p_matrix(self) -> np.ndarray:
        """P as a (3, 3, n, n) array."""
        if self.p_override is not None:
            return np.array(self.p_override, dtype=complex)
        b1, b2, b3 = self.params.b1, self.params.b2, self.params.b3
        pot = self.pot
        n = pot.grid.n
        p = np.zeros((3, 3, n, n), dtype=complex)
        p[0, 1] = self.aux.v12
        p[1, 0] = self.aux.v21
        p[0, 2] = 0.5 * (b1 - b3) * pot.q1
        p[1, 2] = 0.5 * (b2 - b3) * pot.q2
        p[2, 0] = 0.5 * (b1 - b3) * pot.q3
        p[2, 1] = 0.5 * (b2 - b3) * pot.q4
        return p

    def with_p_entry(self, i: int, j: int, values: np.ndarray) -> "OperatorPair":
        """Copy whose P has entry (i, j) replaced."""
        p = self.p_matrix()
        p[i, j] = values
        return replace(self, p_override=p)


def pair_for(pot: Potential, params: LaxParameters, aux: Optional[AuxiliaryFields] = None) -> OperatorPair:
    return OperatorPair(params, pot, aux if aux is not None else compute_aux(pot, params, outflow_tol=np.inf))


def check_constraint(pair: OperatorPair) -> float:
    """Max-norm of sigma P - P sigma - (tau Q - Q tau) over all nodes."""
    sigma = SIGMA
    tau = pair.params.tau
    p = pair.p_matrix()
    q = pair.q_matrix()
    ds = (sigma[:, None] - sigma[None, :])[:, :, None, None]
    dtau = (tau[:, None] - tau[None, :])[:, :, None, None]
    return float(np.max(np.abs(ds * p - dtau * q)))


def smooth_field(grid: Grid2D, seed: int = 0) -> np.ndarray:
    """Seeded smooth test field: one complex Gaussian per component, shape (3, n, n)."""
    rng = np.random.default_rng(seed)
    X, Y = grid.mesh()
    cx = 0.5 * (grid.x_min + grid.x_max)
    cy = 0.5 * (grid.y_min + grid.y_max)
    span = 0.25 * (grid.x_max - grid.x_min)
    out = np.empty((3, grid.n, grid.n), dtype=complex)
    for k in range(3):
        x0, y0 = cx + span * rng.uniform(-0.5, 0.5), cy + span * rng.uniform(-0.5, 0.5)
        width = span * rng.uniform(0.8, 1.2)
        amp = rng.normal() + 1j * rng.normal()
        out[k] = amp * np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / width ** 2)
    return out


def _dx(f: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(f, h, axis=-2)


def _dy(f: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(f, h, axis=-1)


def _apply(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    return np.einsum("ijxy,jxy->ixy", matrix, vector)


def _diag(values: np.ndarray, field: np.ndarray) -> np.ndarray:
    return values[:, None, None] * field


def _apply_l(q: np.ndarray, f: np.ndarray, h: float) -> np.ndarray:
    return _dy(f, h) - _diag(SIGMA, _dx(f, h)) - _apply(q, f)


def _interior_max(values: np.ndarray, band: int) -> float:
    return float(np.max(np.abs(values[:, band:-band, band:-band])))


def _check_series(snapshots: Sequence[Potential], dt: float) -> Grid2D:
    if len(snapshots) != 3:
        raise ValidationException("Residual checks need three consecutive snapshots", details={"count": len(snapshots)})
    grid = snapshots[0].grid
    if any(s.grid != grid for s in snapshots):
        raise ValidationException("Snapshots live on different grids")
    if dt <= 0.0:
        raise ValidationException("Snapshot spacing must be positive", details={"dt": dt})
    return grid


def commutator_residual(
    snapshots: Sequence[Potential],
    params: LaxParameters,
    dt: float,
    aux: Optional[AuxiliaryFields] = None,
    phi: Optional[np.ndarray] = None,
    band: int = DEFAULT_BAND,
    seed: int = 0,
) -> float:
    """Max-norm of L(A phi) - A(L phi) at the middle snapshot for a time-independent field phi.

    Args:
        snapshots: Potentials at t - dt, t, t + dt
        params: Lax parameters
        dt: Snapshot spacing
        aux: Auxiliary fields at the middle snapshot, computed when omitted
        phi: Test field (3, n, n); seeded Gaussians when omitted
        band: Nodes excluded at every edge
        seed: Seed for the default test field

    Returns:
        Residual
    """
    grid = _check_series(snapshots, dt)
    h = grid.h
    tau = params.tau
    phi = phi if phi is not None else smooth_field(grid, seed)
    pair = pair_for(snapshots[1], params, aux)
    q = pair.q_matrix()
    p = pair.p_matrix()
    q_t = (q_matrix(snapshots[2]) - q_matrix(snapshots[0])) / (2.0 * dt)

    a_phi = -_diag(tau, _dx(phi, h)) - _apply(p, phi)
    l_a_phi = _apply_l(q, a_phi, h)

    l_phi = _apply_l(q, phi, h)
    a_l_phi = -_apply(q_t, phi) - _diag(tau, _dx(l_phi, h)) - _apply(p, l_phi)
    return _interior_max(l_a_phi - a_l_phi, band)


def default_profile(axis: KernelAxis) -> AsymptoticProfile:
    """Smooth incoming profile used for solution-mapping checks."""
    mid = 0.5 * (axis.nodes[0] + axis.nodes[-1])
    return AsymptoticProfile.gaussian(
        axis,
        centers=(mid, mid + 0.5, mid - 0.5),
        widths=(1.5, 1.5, 1.5),
        amplitudes=(1.0, 0.5j, 0.8),
    )


def lemma1_residual(
    snapshots: Sequence[Potential],
    params: LaxParameters,
    dt: float,
    a_minus: Optional[AsymptoticProfile] = None,
    aux: Optional[AuxiliaryFields] = None,
    band: int = DEFAULT_BAND,
    domain_tol: float = 1e-6,
) -> float:
    """Check that phi = (d/dt - tau d/dx - P) psi solves L phi = 0.

    psi is the solution for the same incoming profile at each snapshot.

    Args:
        snapshots: Potentials at t - dt, t, t + dt
        params: Lax parameters
        dt: Snapshot spacing
        a_minus: Incoming profile; :func:`default_profile` when omitted
        aux: Auxiliary fields at the middle snapshot
        band: Nodes excluded at every edge
        domain_tol: Largest tolerated |q| on the box frame

    Returns:
        Max-norm of L phi over interior nodes
    """
    grid = _check_series(snapshots, dt)
    h = grid.h
    if a_minus is None:
        a_minus = default_profile(KernelAxis.for_grid(grid))
    psi = [propagate(pot, a_minus, domain_tol)[0].fields for pot in snapshots]
    pair = pair_for(snapshots[1], params, aux)

    phi = (psi[2] - psi[0]) / (2.0 * dt) - _diag(params.tau, _dx(psi[1], h)) - _apply(pair.p_matrix(), psi[1])
    residual = _interior_max(_apply_l(pair.q_matrix(), phi, h), band)
    logger.debug("Solution-mapping residual evaluated", extra={"n": grid.n, "dt": dt, "residual": residual})
    return residual
