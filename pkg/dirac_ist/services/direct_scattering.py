"""Direct scattering: march the linear system along characteristics and build S and S^-1.

In characteristic coordinates (xi = y + x, eta = y - x) the system reads

    d psi1 / d eta = p1 psi3,   d psi2 / d eta = p2 psi3,   d psi3 / d xi = p3 psi1 + p4 psi2,

with p_k = q_k / 2. Components 1 and 2 travel along xi-lines, component 3 along eta-lines.
Everything is computed on the full characteristic lattice (xi_a, eta_b), a, b in [0, m): grid
nodes are the lattice points of one parity of a - b, the others are cell centres where the
potential is sampled bilinearly. Marching only the grid nodes would split the lattice into two
decoupled halves.

One trapezoidal step per lattice edge; the three unknowns at a lattice point satisfy a 3x3
system solved by eliminating psi1 and psi2. The sweep goes by anti-diagonals a + b = d, each
vectorised over the diagonal and over all input columns.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from dirac_ist.core.exceptions import (
    DivergedPropagationException,
    DomainException,
    EdgeDecayException,
    ValidationException,
)
from dirac_ist.core.logging import get_logger
from dirac_ist.core.parallel import chunk_ranges, parallel_map
from dirac_ist.models.fields import AsymptoticProfile, Grid2D, KernelAxis, Potential, WaveField, frozen_array
from dirac_ist.models.schemas import AxisInfo, GridInfo, ScatteringManifest
from dirac_ist.utils.field_io import FieldFormat, field_path, read_fields, write_fields, write_model
from dirac_ist.utils.interpolation import sample

logger = get_logger(__name__)

COLUMN_CHUNK = 64
LOCAL_DET_TOL = 1e-12
KERNEL_NAMES = ("F13", "F23", "G31", "G32")


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """Kernel tables F13, F23 (indexed [xi, eta]) and G31, G32 (indexed [eta, xi]) at time t."""

    axis: KernelAxis
    grid: Grid2D
    f13: np.ndarray
    f23: np.ndarray
    g31: np.ndarray
    g32: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        shape = (self.axis.m, self.axis.m)
        for name in ("f13", "f23", "g31", "g32"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), shape, name))

    @classmethod
    def zeros(cls, axis: KernelAxis, grid: Grid2D, t: float = 0.0) -> "ScatteringData":
        zero = np.zeros((axis.m, axis.m), dtype=complex)
        return cls(axis, grid, zero, zero, zero, zero, t)

    @property
    def tables(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.f13, self.f23, self.g31, self.g32

    def edge_magnitude(self, width: int = 2) -> float:
        """Largest |entry| on the outer ``width`` rows and columns of all four tables."""
        mask = np.zeros((self.axis.m, self.axis.m), dtype=bool)
        mask[:width, :] = mask[-width:, :] = True
        mask[:, :width] = mask[:, -width:] = True
        return float(max(np.max(np.abs(table[mask])) for table in self.tables))

    def check_edge_decay(self, edge_tol: float = 1e-6, strict: bool = False) -> float:
        """Verify that the kernels have decayed at the window edge.

        Args:
            edge_tol: Largest accepted edge magnitude
            strict: Raise instead of warning

        Returns:
            The edge magnitude
        """
        magnitude = self.edge_magnitude()
        if magnitude > edge_tol:
            details = {"edge_magnitude": magnitude, "edge_tol": edge_tol, "m": self.axis.m}
            if strict:
                raise EdgeDecayException("Kernel tables have not decayed at the window edge", details=details)
            logger.warning("Kernel tables have not decayed at the window edge", extra=details)
        return magnitude


@dataclass(frozen=True, eq=False)
class ScatteringOperator:
    """Discrete S (or S^-1) acting on nodal profiles [a1 on xi nodes, a2 on xi nodes, a3 on eta nodes]."""

    axis: KernelAxis
    grid: Grid2D
    matrix: np.ndarray
    inverse: bool = False

    def __post_init__(self) -> None:
        size = 3 * self.axis.m
        object.__setattr__(self, "matrix", frozen_array(self.matrix, (size, size), "matrix"))

    def kernel_block(self, i: int, j: int) -> np.ndarray:
        """Kernel table of block (i, j), 0-based: (block - delta_ij I) / h."""
        m = self.axis.m
        block = np.array(self.matrix[i * m:(i + 1) * m, j * m:(j + 1) * m])
        if i == j:
            block -= np.eye(m)
        return block / self.axis.h


def _check_axis(pot: Potential, axis: KernelAxis) -> None:
    if not np.isclose(axis.h, pot.grid.h, rtol=1e-12, atol=0.0):
        raise ValidationException("Kernel axis step differs from the grid step", details={"axis_h": axis.h})
    axis.lattice_indices(pot.grid)


def _check_domain(pot: Potential, domain_tol: float) -> None:
    frame = pot.frame_max()
    if frame > domain_tol:
        raise DomainException(
            "Potential does not vanish on the frame of the box",
            details={"frame_max": frame, "domain_tol": domain_tol}
        )


def lattice_potential(pot: Potential, axis: KernelAxis) -> np.ndarray:
    """Half potential p_k = q_k / 2 on the characteristic lattice, shape (4, m, m), indexed [k, a, b].

    Lattice points between grid nodes get bilinear values; points outside the box get zero.
    """
    off_xi, off_eta = axis.grid_offsets(pot.grid)
    a = np.arange(axis.m)[:, None] - off_xi
    b = np.arange(axis.m)[None, :] - off_eta
    fi, fj = np.broadcast_arrays((a - b) / 2.0, (a + b) / 2.0)
    out = np.empty((4, axis.m, axis.m), dtype=complex)
    for k, q in enumerate((pot.q1, pot.q2, pot.q3, pot.q4)):
        out[k] = 0.5 * sample(q, fi, fj, order=1)
    return out


def _march(
    p: np.ndarray,
    h: float,
    a_in: np.ndarray,
    capture: Optional[Tuple[int, int, int]] = None,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Sweep the lattice from the bottom-left edges to the top-right edges.

    Args:
        p: Half potential (4, m, m)
        h: Lattice step
        a_in: Incoming profiles (3, m, c): components 1, 2 enter xi-lines at the bottom,
            component 3 enters eta-lines at the left
        capture: (off_xi, off_eta, n) to record column 0 at the grid nodes

    Returns:
        Outgoing profiles (3, m, c) and, when requested, the (3, n, n) field at the grid nodes
    """
    m = p.shape[1]
    half = 0.5 * h
    p1, p2, p3, p4 = p
    psi = np.zeros(a_in.shape, dtype=complex)
    out = np.zeros(a_in.shape, dtype=complex)
    field = None
    if capture is not None:
        off_xi, off_eta, n = capture
        field = np.zeros((3, n, n), dtype=complex)

    for d in range(2 * m - 1):
        a = np.arange(max(0, d - m + 1), min(d, m - 1) + 1)
        b = d - a

        # psi still holds diagonal d - 1, indexed by a: (a, b - 1) sits at a, (a - 1, b) at a - 1
        r1 = np.array(a_in[0, a])
        r2 = np.array(a_in[1, a])
        below = b >= 1
        if below.any():
            ab, bb = a[below], b[below] - 1
            r1[below] = psi[0, ab] + half * p1[ab, bb, None] * psi[2, ab]
            r2[below] = psi[1, ab] + half * p2[ab, bb, None] * psi[2, ab]

        r3 = np.array(a_in[2, b])
        left = a >= 1
        if left.any():
            al, bl = a[left] - 1, b[left]
            r3[left] = psi[2, al] + half * (p3[al, bl, None] * psi[0, al] + p4[al, bl, None] * psi[1, al])

        alpha = half * p1[a, b, None]
        beta = half * p2[a, b, None]
        gamma = half * p3[a, b, None]
        delta = half * p4[a, b, None]
        det = 1.0 - gamma * alpha - delta * beta
        if np.min(np.abs(det)) < LOCAL_DET_TOL:
            raise DivergedPropagationException(
                "Local trapezoid system is singular",
                details={"diagonal": d, "min_det": float(np.min(np.abs(det)))}
            )

        psi3 = (r3 + gamma * r1 + delta * r2) / det
        psi1 = r1 + alpha * psi3
        psi2 = r2 + beta * psi3
        psi[0, a] = psi1
        psi[1, a] = psi2
        psi[2, a] = psi3

        top = b == m - 1
        if top.any():
            out[0, a[top]] = psi1[top]
            out[1, a[top]] = psi2[top]
        if a[-1] == m - 1:
            out[2, b[-1]] = psi3[-1]

        if field is not None:
            twice_j = d - off_xi - off_eta
            if twice_j % 2 == 0 and 0 <= twice_j // 2 < n:
                j = twice_j // 2
                rows = off_xi + j + np.arange(n)
                field[:, :, j] = psi[:, rows, 0]

    if not np.all(np.isfinite(out)):
        raise DivergedPropagationException("Non-finite values while marching")
    return out, field


def _march_backward(p: np.ndarray, h: float, a_out: np.ndarray) -> np.ndarray:
    """Recover incoming profiles from outgoing ones.

    Reflecting the lattice in both axes and negating the potential turns the backward problem
    into a forward sweep of the same discrete equations.
    """
    reflected = -p[:, ::-1, ::-1]
    result, _ = _march(np.ascontiguousarray(reflected), h, np.ascontiguousarray(a_out[:, ::-1, :]))
    return result[:, ::-1, :]


def propagate(
    pot: Potential,
    a_minus: AsymptoticProfile,
    domain_tol: float = 1e-10,
    support_tol: float = 1e-8,
) -> Tuple[WaveField, AsymptoticProfile]:
    """Solve the linear system for the incoming profile ``a_minus``.

    Args:
        pot: Potential, vanishing on the frame of its box
        a_minus: Profiles below the potential on the kernel axis
        domain_tol: Largest tolerated |q| on the frame
        support_tol: Largest tolerated |a_minus| on the outermost axis nodes

    Returns:
        The solution at the grid nodes and the outgoing profiles above the potential
    """
    axis = a_minus.axis
    _check_axis(pot, axis)
    _check_domain(pot, domain_tol)
    if not a_minus.is_compactly_supported(tol=support_tol):
        raise ValidationException(
            "Incoming profile does not vanish at the ends of the kernel axis",
            details={"support_tol": support_tol, "m": axis.m}
        )
    off_xi, off_eta = axis.grid_offsets(pot.grid)
    p = lattice_potential(pot, axis)
    out, field = _march(p, axis.h, a_minus.components[:, :, None], capture=(off_xi, off_eta, pot.grid.n))
    assert field is not None
    wave = WaveField(pot.grid, field[0], field[1], field[2])
    return wave, AsymptoticProfile.from_components(axis, out[:, :, 0])


def _unit_inputs(m: int, columns: range) -> np.ndarray:
    a_in = np.zeros((3, m, len(columns)), dtype=complex)
    for k, c in enumerate(columns):
        a_in[c // m, c % m, k] = 1.0
    return a_in


def _assemble(pot: Potential, axis: Optional[KernelAxis], threads: int, domain_tol: float, inverse: bool):
    axis = axis or KernelAxis.for_grid(pot.grid)
    _check_axis(pot, axis)
    _check_domain(pot, domain_tol)
    m = axis.m
    p = lattice_potential(pot, axis)

    def run_chunk(columns: range) -> np.ndarray:
        a_in = _unit_inputs(m, columns)
        result = _march_backward(p, axis.h, a_in) if inverse else _march(p, axis.h, a_in)[0]
        return result.reshape(3 * m, len(columns))

    chunks = chunk_ranges(3 * m, COLUMN_CHUNK)
    blocks = parallel_map(run_chunk, chunks, threads)
    logger.debug(
        "Scattering operator assembled",
        extra={"m": m, "inverse": inverse, "chunks": len(chunks), "threads": threads}
    )
    return ScatteringOperator(axis, pot.grid, np.concatenate(blocks, axis=1), inverse=inverse)


def assemble_scattering_matrix(
    pot: Potential,
    axis: Optional[KernelAxis] = None,
    threads: int = 1,
    domain_tol: float = 1e-10,
) -> ScatteringOperator:
    """Discrete S: column k is the outgoing profile for the k-th unit nodal input.

    Args:
        pot: Potential
        axis: Kernel axis; the grid's characteristic range when omitted
        threads: Worker threads for the column chunks
        domain_tol: Largest tolerated |q| on the frame

    Returns:
        The (3m x 3m) operator
    """
    return _assemble(pot, axis, threads, domain_tol, inverse=False)


def assemble_inverse_scattering_matrix(
    pot: Potential,
    axis: Optional[KernelAxis] = None,
    threads: int = 1,
    domain_tol: float = 1e-10,
) -> ScatteringOperator:
    """Discrete S^-1 by backward marching from the top edges."""
    return _assemble(pot, axis, threads, domain_tol, inverse=True)


def extract_scattering_data(
    S: ScatteringOperator,
    S_inv: ScatteringOperator,
    edge_tol: float = 1e-6,
    strict: bool = False,
) -> ScatteringData:
    """Slice F13, F23 out of S and G31, G32 out of S^-1.

    Args:
        S: Forward operator
        S_inv: Inverse operator on the same axis
        edge_tol: Edge-decay tolerance
        strict: Raise on edge-decay violations

    Returns:
        Scattering data at t = 0
    """
    if S.axis != S_inv.axis or S.grid != S_inv.grid:
        raise ValidationException("Operators live on different kernel axes")
    if S.inverse or not S_inv.inverse:
        raise ValidationException("Expected a forward and an inverse operator, in that order")
    scat = ScatteringData(
        S.axis,
        S.grid,
        f13=S.kernel_block(0, 2),
        f23=S.kernel_block(1, 2),
        g31=S_inv.kernel_block(2, 0),
        g32=S_inv.kernel_block(2, 1),
    )
    scat.check_edge_decay(edge_tol, strict)
    return scat


def forward_scattering(
    pot: Potential,
    axis: Optional[KernelAxis] = None,
    edge_tol: float = 1e-6,
    strict: bool = False,
    threads: int = 1,
    domain_tol: float = 1e-10,
) -> ScatteringData:
    """Potential to scattering data."""
    S = assemble_scattering_matrix(pot, axis, threads, domain_tol)
    S_inv = assemble_inverse_scattering_matrix(pot, S.axis, threads, domain_tol)
    scat = extract_scattering_data(S, S_inv, edge_tol, strict)
    logger.info(
        "Scattering data computed",
        extra={"m": S.axis.m, "n": pot.grid.n, "edge_magnitude": scat.edge_magnitude()}
    )
    return scat


def born_kernels(pot: Potential, axis: Optional[KernelAxis] = None) -> ScatteringData:
    """First-order kernels: F13 = q1/2, F23 = q2/2, G31 = -q3/2, G32 = -q4/2 on the lattice."""
    axis = axis or KernelAxis.for_grid(pot.grid)
    p = lattice_potential(pot, axis)
    return ScatteringData(axis, pot.grid, f13=p[0], f23=p[1], g31=-p[2].T, g32=-p[3].T)


def save_scattering_data(directory: Path, scat: ScatteringData, fmt: FieldFormat = "binary") -> Path:
    """Write the four tables and a manifest into ``directory``."""
    directory = Path(directory)
    table_grid = scat.axis.as_grid()
    for name, table in zip(KERNEL_NAMES, scat.tables):
        write_fields(field_path(directory, name, fmt), table_grid, [table], fmt)
    manifest = ScatteringManifest(
        axis=AxisInfo(c_min=scat.axis.c_min, h=scat.axis.h, m=scat.axis.m),
        grid=GridInfo.from_grid(scat.grid),
        t=scat.t,
        format=fmt,
    )
    write_model(directory / "manifest.json", manifest)
    return directory


def load_scattering_data(directory: Path) -> ScatteringData:
    """Read tables written by :func:`save_scattering_data`."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise ValidationException("Scattering directory has no manifest", details={"path": str(directory)})
    manifest = ScatteringManifest.model_validate_json(manifest_path.read_text(encoding="utf-8"))
    axis = KernelAxis(manifest.axis.c_min, manifest.axis.h, manifest.axis.m)
    tables = []
    for name in KERNEL_NAMES:
        _, fields = read_fields(field_path(directory, name, manifest.format))
        if fields.shape != (1, axis.m, axis.m):
            raise ValidationException("Kernel table does not match the manifest", details={"table": name})
        tables.append(fields[0])
    return ScatteringData(axis, manifest.grid.to_grid(), *tables, t=manifest.t)
