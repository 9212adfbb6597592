"""Discretizations of the effective surface Hamiltonian.

Two forms are produced:

* a coupled-channel (angular-mode) operator on the cylinder for transport:
  the wavefunction is expanded in e^{i l theta}/sqrt(2 pi), which turns the
  2D problem into coupled 1D lattices along z, block-tridiagonal with
  hopping -1/dz^2 * I;
* a sparse 2D real-space operator on a general chart for closed-system
  spectra, built from the flux-conservative form of the Laplace-Beltrami
  operator plus the effective potential.

Everything is in natural units (hbar = 1, 2m = 1, lengths a, energies e0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .confinement import ConfinementProfile, TransverseWell, transverse_ground_energy
from .errors import NumericalError, ResolutionError
from .geometry import SurfaceChart, geometric_potential

_COUPLING_CLEAN_RTOL = 1e-14  # drop FFT round-off below this relative level

MAX_K_DZ = 0.2  # shortest-wavelength resolution requirement
MIN_POINTS_PER_PITCH = 20


@dataclass(frozen=True)
class ChannelBasis:
    """Angular-momentum channel set l = -l_max..l_max on a cylinder."""

    l_max: int
    radius: float = 1.0

    def __post_init__(self):
        if self.l_max < 0:
            raise ValueError("l_max must be non-negative")
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.l_max, self.l_max + 1)

    @property
    def n_modes(self) -> int:
        return 2 * self.l_max + 1

    def index(self, l: int) -> int:
        if abs(l) > self.l_max:
            raise ValueError(f"mode {l} outside basis (l_max={self.l_max})")
        return l + self.l_max

    @property
    def geometric_potential(self) -> float:
        """Constant curvature potential of the cylinder, -1/(4 r^2)."""
        return -1.0 / (4.0 * self.radius**2)


@dataclass(frozen=True)
class LeadModeSet:
    """Propagation data of the clean leads at a given energy.

    Per channel l: longitudinal momentum ``k`` (complex; imaginary part for
    evanescent channels), Bloch factor ``e^{i k dz}``, lattice group velocity
    ``v = (2/dz) sin(k dz)`` (zero for evanescent channels) and openness.
    A channel is open iff E1 > E_l + V_g (strict; ties count as evanescent),
    with E_l = l^2/r^2 and V_g included according to ``include_vg``.
    """

    e1: float
    dz: float
    modes: np.ndarray
    offsets: np.ndarray
    k: np.ndarray
    bloch: np.ndarray
    velocity: np.ndarray
    open_mask: np.ndarray
    include_vg: bool

    @property
    def n_open(self) -> int:
        return int(np.count_nonzero(self.open_mask))

    @property
    def open_modes(self) -> np.ndarray:
        return self.modes[self.open_mask]

    def continuum_k(self) -> np.ndarray:
        """sqrt(E1 - E_l - V_g) on open channels (nan when closed)."""
        d = self.e1 - self.offsets
        return np.where(d > 0.0, np.sqrt(np.maximum(d, 0.0)), np.nan)


def lead_modes(
    e1: float, basis: ChannelBasis, dz: float, include_vg: bool = True
) -> LeadModeSet:
    """Exact eigenmodes of the discrete clean lead at energy e1.

    The lattice dispersion E = offset + (2/dz^2)(1 - cos k dz) is inverted per
    channel; below-threshold channels get the decaying branch (|e^{i k dz}| < 1).
    """
    modes = basis.modes
    vg = basis.geometric_potential if include_vg else 0.0
    offsets = (modes / basis.radius) ** 2 + vg
    x = 1.0 - (e1 - offsets) * dz**2 / 2.0

    k = np.empty(modes.shape, dtype=complex)
    bloch = np.empty(modes.shape, dtype=complex)
    velocity = np.zeros(modes.shape, dtype=float)
    open_mask = np.zeros(modes.shape, dtype=bool)

    for i, xi in enumerate(x):
        if -1.0 < xi < 1.0:
            s = math.sqrt(1.0 - xi * xi)
            k[i] = math.acos(xi) / dz
            bloch[i] = complex(xi, s)
            velocity[i] = 2.0 * s / dz
            open_mask[i] = True
        elif xi >= 1.0:
            kap = math.acosh(xi) / dz if xi > 1.0 else 0.0
            k[i] = 1j * kap
            bloch[i] = xi - math.sqrt(xi * xi - 1.0)
        else:
            kap = math.acosh(-xi) / dz
            k[i] = math.pi / dz + 1j * kap
            bloch[i] = xi + math.sqrt(xi * xi - 1.0)

    return LeadModeSet(
        e1=float(e1),
        dz=float(dz),
        modes=modes,
        offsets=offsets,
        k=k,
        bloch=bloch,
        velocity=velocity,
        open_mask=open_mask,
        include_vg=include_vg,
    )


# ---------------------------------------------------------------------------
# angular Fourier couplings of the inhomogeneity potential
# ---------------------------------------------------------------------------


def fourier_couplings(
    profile: ConfinementProfile,
    well: TransverseWell,
    basis: ChannelBasis,
    z,
    n_theta: Optional[int] = None,
) -> np.ndarray:
    """Angular-mode matrix of (s - 1) E0 at height(s) z.

    V_{l,l'}(z) = (1/2pi) Int_0^{2pi} e^{-i(l-l') theta} (s(theta,z)-1) E0 dtheta,
    evaluated by FFT.  The matrix is Hermitian and Toeplitz in l - l'; for the
    single-cosine helical profile only |l - l'| in {0, m_d} survives.

    z may be a scalar (returns (n, n)) or a 1D array (returns (len(z), n, n)).
    """
    scalar = np.isscalar(z) or np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    n = basis.n_modes
    if profile.kind == "homogeneous":
        out = np.zeros((zs.size, n, n), dtype=complex)
        return out[0] if scalar else out

    m_d = profile.theta_harmonic
    nyquist_floor = 2 * (2 * basis.l_max) + 2
    if n_theta is None:
        n_theta = max(64, nyquist_floor, 8 * m_d if m_d else 256)
    if m_d is not None and m_d >= 1 and n_theta < 8 * m_d:
        raise ResolutionError(
            f"n_theta = {n_theta} under-samples the corrugation "
            f"(need >= 8*m_d = {8 * m_d} theta-samples)"
        )
    if n_theta < nyquist_floor:
        raise ResolutionError(
            f"n_theta = {n_theta} cannot resolve couplings out to |l-l'| = "
            f"{2 * basis.l_max} (need >= {nyquist_floor})"
        )

    e0 = transverse_ground_energy(well)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    f = (profile(theta[None, :], zs[:, None]) - 1.0) * e0  # (nz, n_theta), real
    coeff = np.fft.fft(f, axis=1) / n_theta  # c_m = (1/n) sum f e^{-i m theta}

    diff = basis.modes[:, None] - basis.modes[None, :]
    v = coeff[:, np.mod(diff, n_theta)]  # (nz, n, n)

    scale = np.max(np.abs(v))
    if scale > 0.0:
        v[np.abs(v) < _COUPLING_CLEAN_RTOL * scale] = 0.0
    v = 0.5 * (v + np.conj(np.swapaxes(v, -1, -2)))
    return v[0] if scalar else v


# ---------------------------------------------------------------------------
# coupled-channel operator on the cylinder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoupledChannelOperator:
    """Block-tridiagonal effective Hamiltonian on the cylinder.

    Slices sit at ``z_nodes``; on-site blocks contain the kinetic constant
    2/dz^2, the channel offsets l^2/r^2 (+ V_g), and the Fourier couplings of
    (s-1) E0 inside the scattering window.  Hopping blocks are hop * identity
    with hop = -1/dz^2.  Slices outside the window (lead padding) are diagonal
    and z-independent, matching the semi-infinite leads, whose on-site
    diagonal is 2/dz^2 + lead_offsets.
    """

    basis: ChannelBasis
    dz: float
    z_nodes: np.ndarray
    onsite: np.ndarray  # (n_slices, n_modes, n_modes) complex
    lead_offsets: np.ndarray  # (n_modes,)
    include_vg: bool
    window: tuple[float, float]
    n_pad: int
    style: str  # "open" (transport) or "closed" (Dirichlet segment)
    meta: dict = field(default_factory=dict)

    @property
    def hop(self) -> float:
        return -1.0 / self.dz**2

    @property
    def n_slices(self) -> int:
        return self.onsite.shape[0]

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    def lead_mode_set(self, e1: float) -> LeadModeSet:
        return lead_modes(e1, self.basis, self.dz, include_vg=self.include_vg)


def _taper_weight(z: np.ndarray, length: float, taper: float) -> np.ndarray:
    """Cosine on/off ramp of the window potential; abrupt when taper == 0."""
    w = np.zeros_like(z)
    inside = (z > 0.0) & (z < length)
    w[inside] = 1.0
    if taper > 0.0:
        left = inside & (z < taper)
        right = inside & (z > length - taper)
        w[left] = 0.5 * (1.0 - np.cos(np.pi * z[left] / taper))
        w[right] = 0.5 * (1.0 - np.cos(np.pi * (length - z[right]) / taper))
    return w


def required_dz(
    e1_max: float,
    basis: ChannelBasis,
    profile: Optional[ConfinementProfile] = None,
    well: Optional[TransverseWell] = None,
    include_vg: bool = True,
) -> float:
    """Largest slice spacing satisfying the resolution rules.

    k_max dz <= 0.2 with k_max from the deepest point of the device (lead
    band bottom lowered by the attractive well depth epsilon*E0), and at
    least 20 slices per helix pitch when the potential oscillates in z.
    """
    vg = basis.geometric_potential if include_vg else 0.0
    depth = 0.0
    if profile is not None and profile.kind != "homogeneous" and well is not None:
        depth = profile.epsilon * transverse_ground_energy(well)
    k2 = e1_max - vg + depth
    dz = MAX_K_DZ / math.sqrt(k2) if k2 > 0.0 else math.inf
    if profile is not None and profile.z_period is not None:
        dz = min(dz, profile.z_period / MIN_POINTS_PER_PITCH)
    if not math.isfinite(dz):
        raise ResolutionError("cannot determine a slice spacing: no energy scale")
    return dz


def assemble_coupled_channel(
    profile: ConfinementProfile,
    well: TransverseWell,
    basis: ChannelBasis,
    length: float,
    dz: Optional[float] = None,
    n_z: Optional[int] = None,
    lead_pad: float = 0.0,
    taper: float = 0.0,
    include_vg: bool = True,
    n_theta: Optional[int] = None,
    e1_max: Optional[float] = None,
    closed: bool = False,
) -> CoupledChannelOperator:
    """Build the coupled-channel operator for a scattering window [0, length].

    Exactly one of ``dz`` and ``n_z`` fixes the grid (``dz`` is snapped so an
    integer number of slices covers the window).  ``lead_pad`` adds clean
    slices of that physical length on both sides (transport style only).
    ``taper`` ramps the window potential on and off over that length at each
    edge; 0 means abrupt edges.  ``e1_max``, when given, validates the grid
    against the k_max*dz <= 0.2 rule; the helix-pitch rule is always applied.

    With ``closed=True`` the operator describes a Dirichlet segment: interior
    nodes z = j*h, j = 1..n_z, h = length/(n_z+1), no padding, potential on
    the whole segment.
    """
    if length <= 0.0:
        raise ValueError("window length must be positive")
    if (dz is None) == (n_z is None):
        raise ValueError("specify exactly one of dz and n_z")

    if closed:
        if n_z is None:
            n_z = max(int(math.ceil(length / dz)) - 1, 1)
        h = length / (n_z + 1)
        _validate_dz(h, profile, e1_max, basis, well, include_vg)
        z_nodes = length * np.arange(1, n_z + 1) / (n_z + 1)
        n_pad = 0
    else:
        if n_z is None:
            n_z = max(int(math.ceil(length / dz)), 1)
        h = length / n_z
        _validate_dz(h, profile, e1_max, basis, well, include_vg)
        n_pad = int(round(lead_pad / h)) if lead_pad > 0.0 else 0
        total = n_z + 2 * n_pad
        z_nodes = (np.arange(total) + 0.5) * h - n_pad * h

    n = basis.n_modes
    vg = basis.geometric_potential if include_vg else 0.0
    lead_offsets = (basis.modes / basis.radius) ** 2 + vg
    kinetic = 2.0 / h**2

    onsite = np.zeros((z_nodes.size, n, n), dtype=complex)
    idx = np.arange(n)
    onsite[:, idx, idx] = kinetic + lead_offsets[None, :]

    if profile.kind != "homogeneous":
        if closed:
            weights = np.ones_like(z_nodes)
        else:
            weights = _taper_weight(z_nodes, length, taper)
        active = weights > 0.0
        if np.any(active):
            v = fourier_couplings(profile, well, basis, z_nodes[active], n_theta)
            onsite[active] += weights[active, None, None] * v

    return CoupledChannelOperator(
        basis=basis,
        dz=float(h),
        z_nodes=z_nodes,
        onsite=onsite,
        lead_offsets=lead_offsets,
        include_vg=include_vg,
        window=(0.0, float(length)),
        n_pad=n_pad,
        style="closed" if closed else "open",
        meta={
            "taper": float(taper),
            "profile_kind": profile.kind,
            "m_d": profile.theta_harmonic,
            "epsilon": profile.epsilon,
        },
    )


def _validate_dz(dz, profile, e1_max, basis, well, include_vg):
    if e1_max is not None:
        vg = basis.geometric_potential if include_vg else 0.0
        k2 = e1_max - vg
        if k2 > 0.0:
            k_max = math.sqrt(k2)
            if k_max * dz > MAX_K_DZ * (1.0 + 1e-12):
                raise ResolutionError(
                    f"dz = {dz:.4g} under-resolves the shortest wavelength at "
                    f"E1 = {e1_max:.4g} (k_max*dz = {k_max * dz:.3g} > {MAX_K_DZ}); "
                    f"need dz <= {MAX_K_DZ / k_max:.4g}"
                )
    if profile is not None and profile.z_period is not None:
        if dz > profile.z_period / MIN_POINTS_PER_PITCH * (1.0 + 1e-12):
            raise ResolutionError(
                f"dz = {dz:.4g} under-resolves the helix pitch "
                f"{profile.z_period:.4g} (need >= {MIN_POINTS_PER_PITCH} slices "
                f"per pitch: dz <= {profile.z_period / MIN_POINTS_PER_PITCH:.4g})"
            )


def closed_matrix(op: CoupledChannelOperator) -> np.ndarray:
    """Dense Hermitian matrix of the operator with Dirichlet ends."""
    nmat = op.n_slices * op.n_modes
    h = np.zeros((nmat, nmat), dtype=complex)
    n = op.n_modes
    hop = op.hop
    for j in range(op.n_slices):
        h[j * n : (j + 1) * n, j * n : (j + 1) * n] = op.onsite[j]
        if j + 1 < op.n_slices:
            blk = hop * np.eye(n)
            h[j * n : (j + 1) * n, (j + 1) * n : (j + 2) * n] = blk
            h[(j + 1) * n : (j + 2) * n, j * n : (j + 1) * n] = blk
    return h


def closed_eigenvalues(op: CoupledChannelOperator, k: int) -> np.ndarray:
    """Lowest k eigenvalues of the Dirichlet segment."""
    h = closed_matrix(op)
    vals = np.linalg.eigvalsh(h)
    return vals[:k]


# ---------------------------------------------------------------------------
# sparse 2D operator on a general chart
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid2D:
    """Node layout of the 2D discretization (tensor grid, per-axis closure)."""

    q1: np.ndarray
    q2: np.ndarray
    h1: float
    h2: float
    bc: tuple[str, str]
    mass: np.ndarray  # (n1*n2,) measure weights sqrt(g) h1 h2
    v_min: float  # nodal potential minimum; spectral lower bound of H

    @property
    def shape(self) -> tuple[int, int]:
        return self.q1.size, self.q2.size


def _axis_nodes(lo: float, hi: float, n: int, closure: str):
    extent = hi - lo
    if closure == "dirichlet":
        h = extent / (n + 1)
        nodes = lo + h * np.arange(1, n + 1)
    elif closure == "periodic":
        h = extent / n
        nodes = lo + h * np.arange(n)
    elif closure == "natural":
        h = extent / n
        nodes = lo + h * (np.arange(n) + 0.5)
    else:
        raise ValueError(f"unknown closure '{closure}'")
    return nodes, h


def _metric_parts(chart: SurfaceChart, q1, q2):
    from .geometry import _jacobian  # internal evaluator, shared with metric()

    jac = _jacobian(chart, np.asarray(q1, float), np.asarray(q2, float))
    g11 = np.einsum("...i,...i->...", jac[..., 0], jac[..., 0])
    g12 = np.einsum("...i,...i->...", jac[..., 0], jac[..., 1])
    g22 = np.einsum("...i,...i->...", jac[..., 1], jac[..., 1])
    det = g11 * g22 - g12 * g12
    if np.any(det <= 0.0):
        raise NumericalError("metric degenerate at a stencil point")
    sq = np.sqrt(det)
    return g11, g12, g22, sq


def assemble_2d(
    chart: SurfaceChart,
    profile: Optional[ConfinementProfile] = None,
    well: Optional[TransverseWell] = None,
    n1: int = 64,
    n2: int = 64,
    bc: Optional[tuple[str, str]] = None,
):
    """Sparse Hermitian 2D Hamiltonian on the chart's domain box.

    The kinetic part is the flux-conservative stencil of
    -(1/sqrt(g)) d_a sqrt(g) g^{ab} d_b with metric coefficients at half-grid
    points (a 5-point stencil; 9-point corner terms appear when g is
    non-diagonal); the potential is V_g + (s-1) E0 on the diagonal.  The
    operator is symmetrized by similarity with the measure weights g^{1/4}
    (generalized problem A psi = E M psi recast as M^{-1/2} A M^{-1/2}).

    Returns (H, grid) with H in CSR format, exactly symmetric.
    """
    (a1, b1), (a2, b2) = chart.domain
    bc = bc or (chart.axis_closure(0), chart.axis_closure(1))
    q1, h1 = _axis_nodes(a1, b1, n1, bc[0])
    q2, h2 = _axis_nodes(a2, b2, n2, bc[1])

    qq1, qq2 = np.meshgrid(q1, q2, indexing="ij")
    g11_n, g12_n, g22_n, sq_n = _metric_parts(chart, qq1, qq2)
    mass = (sq_n * h1 * h2).ravel()

    def node_id(i, j):
        return i * n2 + j

    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(v.ravel())

    ii = np.arange(n1)
    jj = np.arange(n2)

    # axis-1 fluxes: edges between (i, j) and (i+1, j) with wrap/walls per bc
    left = ii[:-1]
    right = ii[1:]
    faces1 = 0.5 * (q1[left] + q1[right])
    if bc[0] == "periodic":
        left = np.concatenate([left, [n1 - 1]])
        right = np.concatenate([right, [0]])
        faces1 = np.concatenate([faces1, [q1[-1] + 0.5 * h1]])
    f1, f2 = np.meshgrid(faces1, q2, indexing="ij")
    _, _, g22_f, sq_f = _metric_parts(chart, f1, f2)
    w = (g22_f / sq_f) * (h2 / h1)  # sqrt(g) g^{11} * h2/h1
    p = node_id(left[:, None], jj[None, :])
    q = node_id(right[:, None], jj[None, :])
    add(p, p, w)
    add(q, q, w)
    add(p, q, -w)
    add(q, p, -w)
    if bc[0] == "dirichlet":
        for i_node, face in ((0, a1 + 0.5 * h1), (n1 - 1, b1 - 0.5 * h1)):
            _, _, g22_w, sq_w = _metric_parts(chart, np.full(n2, face), q2)
            ww = (g22_w / sq_w) * (h2 / h1)
            pw = node_id(np.full(n2, i_node), jj)
            add(pw, pw, ww)

    # axis-2 fluxes
    lo = jj[:-1]
    hi = jj[1:]
    faces2 = 0.5 * (q2[lo] + q2[hi])
    if bc[1] == "periodic":
        lo = np.concatenate([lo, [n2 - 1]])
        hi = np.concatenate([hi, [0]])
        faces2 = np.concatenate([faces2, [q2[-1] + 0.5 * h2]])
    f1, f2 = np.meshgrid(q1, faces2, indexing="ij")
    g11_f, _, _, sq_f = _metric_parts(chart, f1, f2)
    w = (g11_f / sq_f) * (h1 / h2)  # sqrt(g) g^{22} * h1/h2
    p = node_id(ii[:, None], lo[None, :])
    q = node_id(ii[:, None], hi[None, :])
    add(p, p, w)
    add(q, q, w)
    add(p, q, -w)
    add(q, p, -w)
    if bc[1] == "dirichlet":
        for j_node, face in ((0, a2 + 0.5 * h2), (n2 - 1, b2 - 0.5 * h2)):
            g11_w, _, _, sq_w = _metric_parts(chart, q1, np.full(n1, face))
            ww = (g11_w / sq_w) * (h1 / h2)
            pw = node_id(ii, np.full(n1, j_node))
            add(pw, pw, ww)

    # mixed term (9-point) when the metric is non-diagonal
    if np.max(np.abs(g12_n)) > 1e-14 * max(1.0, float(np.max(np.abs(g11_n)))):
        li = ii[:-1]
        ri = ii[1:]
        if bc[0] == "periodic":
            li = np.concatenate([li, [n1 - 1]])
            ri = np.concatenate([ri, [0]])
        lj = jj[:-1]
        hj = jj[1:]
        if bc[1] == "periodic":
            lj = np.concatenate([lj, [n2 - 1]])
            hj = np.concatenate([hj, [0]])
        c1 = q1[li] + 0.5 * h1
        c2 = q2[lj] + 0.5 * h2
        cc1, cc2 = np.meshgrid(c1, c2, indexing="ij")
        _, g12_c, _, sq_c = _metric_parts(chart, cc1, cc2)
        wc = -(g12_c / sq_c) * (h1 * h2)  # sqrt(g) g^{12} * h1 h2
        p00 = node_id(li[:, None], lj[None, :])
        p10 = node_id(ri[:, None], lj[None, :])
        p01 = node_id(li[:, None], hj[None, :])
        p11 = node_id(ri[:, None], hj[None, :])
        corners = (p00, p10, p01, p11)
        avec = np.array([-1.0, 1.0, -1.0, 1.0]) / (2.0 * h1)
        bvec = np.array([-1.0, -1.0, 1.0, 1.0]) / (2.0 * h2)
        cmat = np.outer(avec, bvec) + np.outer(bvec, avec)
        for a in range(4):
            for b in range(4):
                if cmat[a, b] != 0.0:
                    add(corners[a], corners[b], wc * cmat[a, b])

    # effective potential on the diagonal
    v_node = geometric_potential(chart, (qq1, qq2))
    if profile is not None and profile.kind != "homogeneous":
        if well is None:
            raise ValueError("a transverse well is required with a profile")
        e0 = transverse_ground_energy(well)
        v_node = v_node + (profile(qq1, qq2) - 1.0) * e0
    diag_ids = np.arange(n1 * n2)
    add(diag_ids, diag_ids, v_node.ravel() * mass)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    inv_sqrt_m = 1.0 / np.sqrt(mass)
    # parenthesized so transposed entries scale by the bitwise-identical factor
    vals = vals * (inv_sqrt_m[rows] * inv_sqrt_m[cols])

    h = sp.coo_matrix((vals, (rows, cols)), shape=(n1 * n2, n1 * n2)).tocsr()
    grid = Grid2D(
        q1=q1,
        q2=q2,
        h1=h1,
        h2=h2,
        bc=bc,
        mass=mass,
        v_min=float(np.min(v_node)),
    )
    return h, grid


def lowest_eigenvalues_2d(
    h: sp.csr_matrix, k: int, sigma: Optional[float] = None
) -> np.ndarray:
    """Lowest k eigenvalues of the sparse 2D operator (shift-invert Lanczos).

    ``sigma`` must sit below the spectrum; pass ``grid.v_min`` minus a margin
    (the kinetic quadratic form is positive semidefinite, so the potential
    minimum bounds the spectrum from below).
    """
    if sigma is None:
        sigma = -1.0
    try:
        vals = spla.eigsh(h, k=k, sigma=sigma, which="LM", return_eigenvectors=False)
    except Exception as exc:  # factorization or convergence failure
        raise NumericalError(f"sparse eigensolve failed: {exc}") from exc
    return np.sort(vals)
