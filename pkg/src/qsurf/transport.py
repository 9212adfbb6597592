"""Open scattering problem for the coupled-channel operator.

The device (scattering window plus optional clean padding) is a
block-tridiagonal lattice; semi-infinite clean leads are folded into
self-energies on the first and last slice.  The retarded Green's function is
computed slice by slice (recursive Green's function, i.e. a block Thomas
sweep), the scattering state is obtained from an injection source on the
boundary slice, and transmission/reflection amplitudes follow from the lead
Bloch factors with lattice-velocity flux normalization, so S-matrix unitarity
holds to machine precision on the lattice.

Derivation of the injection and extraction formulas, in the conventions of
:mod:`qsurf.operator` (hopping t = -1/dz^2, lead on-site 2/dz^2 + offset_l):

* the semi-infinite lead surface Green's function per channel is
  g_s = e^{i k dz} / t, so the self-energy on the boundary slice is
  Sigma_l = t e^{i k_l dz};
* a unit-amplitude wave incident from the left in channel l enters the
  device equations as a source Q_1 = i (v_l / dz) e^{i k_l dz} chi_l on the
  first slice, where v_l = (2/dz) sin(k_l dz);
* with psi = G Q the outgoing wavefunction amplitudes referenced at the
  first lead site are e^{i k_l' dz} psi_1 (reflection side, after removing
  the incident contribution -e^{2 i k_l dz} delta) and e^{i k_l' dz} psi_N
  (transmission side);
* flux normalization multiplies amplitudes by sqrt(v_out / v_in).
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClosedChannelError,
    NumericalError,
    ThresholdProximityWarning,
    UndefinedPolarizationError,
)
from .operator import CoupledChannelOperator, LeadModeSet

THRESHOLD_ATOL = 1e-9


def lead_self_energy(leads: LeadModeSet, dz: float) -> np.ndarray:
    """Diagonal retarded self-energy of a clean semi-infinite lead.

    Sigma_l = -(1/dz^2) e^{i k_l dz}: negative imaginary part on open
    channels, real decaying branch on evanescent ones.
    """
    if np.any(np.abs(leads.bloch) > 1.0 + 1e-12):
        raise NumericalError(
            "growing lead branch selected (|e^{ik dz}| > 1); "
            "this indicates a dispersion bookkeeping bug"
        )
    sigma = -(1.0 / dz**2) * leads.bloch
    if np.any(sigma.imag > 1e-15 / dz**2):
        raise NumericalError("lead self-energy lost its retarded character")
    return sigma


@dataclass(frozen=True)
class SMatrix:
    """Flux-normalized scattering amplitudes at one energy.

    Blocks are indexed [outgoing, incident] over the open modes listed in
    ``open_modes`` (identical in both leads).  ``t``/``r`` belong to left
    incidence, ``t_reverse``/``r_reverse`` to right incidence.  The paper-order
    mode-resolved conductance sigma_{l', l} ("incident l' scattered into l")
    is |t[index(l), index(l')]|^2; see :func:`conductance`.
    """

    e1: float
    open_modes: np.ndarray
    t: np.ndarray
    r: np.ndarray
    t_reverse: np.ndarray
    r_reverse: np.ndarray
    velocities: np.ndarray
    leads: LeadModeSet
    include_vg: bool
    threshold_flag: bool = False

    @property
    def n_open(self) -> int:
        return self.open_modes.size

    def full(self) -> np.ndarray:
        """S = [[r, t'], [t, r']] over (left in, right in)."""
        return np.block([[self.r, self.t_reverse], [self.t, self.r_reverse]])

    def unitarity_residual(self) -> float:
        if self.n_open == 0:
            return 0.0
        s = self.full()
        return float(np.max(np.abs(s.conj().T @ s - np.eye(2 * self.n_open))))

    def flux_error(self) -> float:
        """Max deviation of per-incident-mode flux sums from 1."""
        if self.n_open == 0:
            return 0.0
        sums_l = np.sum(np.abs(self.t) ** 2 + np.abs(self.r) ** 2, axis=0)
        sums_r = np.sum(
            np.abs(self.t_reverse) ** 2 + np.abs(self.r_reverse) ** 2, axis=0
        )
        return float(np.max(np.abs(np.concatenate([sums_l, sums_r]) - 1.0)))

    def mode_index(self, l: int) -> int:
        hits = np.nonzero(self.open_modes == l)[0]
        if hits.size == 0:
            raise ClosedChannelError(f"mode {l} is not open at E1 = {self.e1:.6g}")
        return int(hits[0])


def _solve_block_tridiag(d_blocks: np.ndarray, b: float, rhs: np.ndarray):
    """Solve the block-tridiagonal system with diagonal blocks ``d_blocks`` and
    constant scalar off-diagonal blocks ``b * I`` (both sides).

    Forward sweep builds the left-connected inverses (the RGF recursion);
    the backward sweep is the Green's-function backsubstitution that yields
    the scattering state on every slice.
    """
    n_sl = d_blocks.shape[0]
    g = np.empty_like(d_blocks)
    y = np.empty_like(rhs)
    try:
        g[0] = np.linalg.inv(d_blocks[0])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"slice 0 inversion failed: {exc}") from exc
    y[0] = g[0] @ rhs[0]
    b2 = b * b
    for n in range(1, n_sl):
        try:
            g[n] = np.linalg.inv(d_blocks[n] - b2 * g[n - 1])
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"slice {n} inversion failed: {exc}") from exc
        y[n] = g[n] @ (rhs[n] - b * y[n - 1])
    x = np.empty_like(rhs)
    x[n_sl - 1] = y[n_sl - 1]
    for n in range(n_sl - 2, -1, -1):
        x[n] = y[n] - b * (g[n] @ x[n + 1])
    return x


def _scattering_solution(op: CoupledChannelOperator, e1: float):
    """Shared setup: leads, self-energy, and the solved scattering state
    for unit-amplitude injection in every open channel from both sides.

    Returns (leads, open_idx, psi, threshold_flag) with psi of shape
    (n_slices, n_modes, 2*n_open); columns 0..n_open-1 are left incidence in
    the order of open modes, the rest right incidence.
    """
    if op.style != "open":
        raise ValueError("transport needs an operator assembled with closed=False")
    leads = op.lead_mode_set(e1)
    threshold_flag = bool(np.min(np.abs(e1 - leads.offsets)) < THRESHOLD_ATOL)
    if threshold_flag:
        warnings.warn(
            f"E1 = {e1!r} is within {THRESHOLD_ATOL} of a channel threshold",
            ThresholdProximityWarning,
            stacklevel=3,
        )
    open_idx = np.nonzero(leads.open_mask)[0]
    n_sl, n = op.n_slices, op.n_modes

    sigma = lead_self_energy(leads, op.dz)
    d_blocks = -op.onsite.copy()
    idx = np.arange(n)
    d_blocks[:, idx, idx] += e1
    d_blocks[0, idx, idx] -= sigma
    d_blocks[n_sl - 1, idx, idx] -= sigma

    n_open = open_idx.size
    if n_open == 0:
        return leads, open_idx, np.zeros((n_sl, n, 0), dtype=complex), threshold_flag

    rhs = np.zeros((n_sl, n, 2 * n_open), dtype=complex)
    amp = 1j * (leads.velocity[open_idx] / op.dz) * leads.bloch[open_idx]
    rhs[0, open_idx, np.arange(n_open)] = amp
    rhs[n_sl - 1, open_idx, n_open + np.arange(n_open)] = amp

    b = -op.hop  # off-diagonal block of (E - H) is +1/dz^2
    psi = _solve_block_tridiag(d_blocks, b, rhs)
    return leads, open_idx, psi, threshold_flag


def rgf_smatrix(op: CoupledChannelOperator, e1: float) -> SMatrix:
    """S-matrix at energy e1 via the recursive Green's function sweep."""
    leads, open_idx, psi, flagged = _scattering_solution(op, e1)
    n_open = open_idx.size
    if n_open == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return SMatrix(
            e1=float(e1),
            open_modes=np.array([], dtype=int),
            t=empty,
            r=empty,
            t_reverse=empty,
            r_reverse=empty,
            velocities=np.array([]),
            leads=leads,
            include_vg=op.include_vg,
            threshold_flag=flagged,
        )

    bloch_open = leads.bloch[open_idx]
    v_open = leads.velocity[open_idx]
    first = psi[0][open_idx, :]
    last = psi[-1][open_idx, :]

    cols_l = np.arange(n_open)
    cols_r = n_open + cols_l
    t_raw = bloch_open[:, None] * last[:, cols_l]
    r_raw = bloch_open[:, None] * first[:, cols_l] - np.diag(bloch_open**2)
    tp_raw = bloch_open[:, None] * first[:, cols_r]
    rp_raw = bloch_open[:, None] * last[:, cols_r] - np.diag(bloch_open**2)

    flux = np.sqrt(v_open)[:, None] / np.sqrt(v_open)[None, :]
    return SMatrix(
        e1=float(e1),
        open_modes=leads.modes[open_idx],
        t=flux * t_raw,
        r=flux * r_raw,
        t_reverse=flux * tp_raw,
        r_reverse=flux * rp_raw,
        velocities=v_open,
        leads=leads,
        include_vg=op.include_vg,
        threshold_flag=flagged,
    )


def conductance(s: SMatrix):
    """Landauer conductance sigma/sigma0 and the mode-resolved table.

    sigma/sigma0 = sum |t|^2 over open channels with sigma0 = e^2/h (spinless).
    The table maps (l_incident, l_outgoing) -> sigma_{l', l}/sigma0, in the
    incident-first index order.
    """
    total = float(np.sum(np.abs(s.t) ** 2))
    table = {}
    for ci, l_in in enumerate(s.open_modes):
        for ri, l_out in enumerate(s.open_modes):
            table[(int(l_in), int(l_out))] = float(np.abs(s.t[ri, ci]) ** 2)
    return total, table


def polarization(s: SMatrix, pair: int = 1, side: str = "right") -> float:
    """Angular-momentum polarization of the outgoing current.

    P = sum_{l'} (sigma_{l', +pair} - sigma_{l', -pair}) / sigma over incident
    modes l', for the outgoing mode pair (+pair, -pair).  ``side`` selects the
    outgoing lead: "right" uses left incidence (transmission block t),
    "left" uses right incidence (t_reverse).  Exactly zero when the
    transmission is symmetric under l -> -l.
    """
    if pair <= 0:
        raise ValueError("pair must be a positive mode index")
    block = s.t if side == "right" else s.t_reverse
    total = float(np.sum(np.abs(block) ** 2))
    if total <= 0.0:
        raise UndefinedPolarizationError(
            f"no transmitted current at E1 = {s.e1:.6g}; polarization undefined"
        )
    plus = np.nonzero(s.open_modes == pair)[0]
    minus = np.nonzero(s.open_modes == -pair)[0]
    sig_plus = float(np.sum(np.abs(block[plus, :]) ** 2)) if plus.size else 0.0
    sig_minus = float(np.sum(np.abs(block[minus, :]) ** 2)) if minus.size else 0.0
    return (sig_plus - sig_minus) / total


@dataclass(frozen=True)
class DensityMap:
    """Scattering-state density |psi(theta, z)|^2 on the device grid.

    Normalization: the incident plane wave e^{il theta} e^{ikz} / sqrt(2 pi)
    has unit channel amplitude, i.e. uniform density 1/(2 pi).
    """

    theta: np.ndarray
    z: np.ndarray
    density: np.ndarray  # (n_z, n_theta)
    psi: np.ndarray  # (n_z, n_theta) complex
    e1: float
    l_incident: int
    side: str
    window: tuple[float, float]


def scattering_density(
    op: CoupledChannelOperator,
    e1: float,
    l_incident: int,
    n_theta: int = 64,
    side: str = "left",
) -> DensityMap:
    """Scattering wavefunction density for one incident open mode.

    The channel column is reconstructed by the same block sweep used for the
    S-matrix and synthesized on a uniform theta grid.
    """
    leads, open_idx, psi, _ = _scattering_solution(op, e1)
    open_modes = leads.modes[open_idx]
    hits = np.nonzero(open_modes == l_incident)[0]
    if hits.size == 0:
        offset = (l_incident / op.basis.radius) ** 2 + (
            op.basis.geometric_potential if op.include_vg else 0.0
        )
        raise ClosedChannelError(
            f"mode {l_incident} is closed at E1 = {e1:.6g} "
            f"(threshold {offset:.6g})"
        )
    col = int(hits[0]) if side == "left" else open_idx.size + int(hits[0])
    amps = psi[:, :, col]  # (n_slices, n_modes)

    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    phases = np.exp(1j * np.outer(theta, op.basis.modes))  # (n_theta, n_modes)
    field_tz = (amps @ phases.T) / np.sqrt(2.0 * np.pi)  # (n_slices, n_theta)
    return DensityMap(
        theta=theta,
        z=op.z_nodes.copy(),
        density=np.abs(field_tz) ** 2,
        psi=field_tz,
        e1=float(e1),
        l_incident=int(l_incident),
        side=side,
        window=op.window,
    )


# ---------------------------------------------------------------------------
# energy sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPlan:
    """Inputs of an energy sweep over one assembled operator.

    ``energies`` are absolute E1 values (same convention as the operator's
    include_vg flag).  ``record_l`` bounds |l| of the recorded mode-resolved
    pairs; ``pair`` selects the polarization pair.  Workers > 1 parallelize
    over energy points with deterministic result order.
    """

    op: CoupledChannelOperator
    energies: np.ndarray
    pair: int = 1
    record_l: int = 2
    workers: int = 1


@dataclass
class ConductanceCurve:
    """Energy-resolved transport results with per-point diagnostics."""

    energies: np.ndarray
    energies_relative: np.ndarray
    sigma_total: np.ndarray
    sigma_modes: np.ndarray  # (n_e, n_rec, n_rec) indexed [incident, outgoing]
    recorded_modes: np.ndarray
    p_lz: np.ndarray
    n_open: np.ndarray
    unitarity: np.ndarray
    flux_error: np.ndarray
    threshold_flags: np.ndarray
    failures: list
    meta: dict = field(default_factory=dict)


def _sweep_point(op: CoupledChannelOperator, e1: float, pair: int, record_l: int):
    s = rgf_smatrix(op, e1)
    rec = np.arange(-record_l, record_l + 1)
    sig = np.zeros((rec.size, rec.size))
    total, table = conductance(s)
    for (l_in, l_out), val in table.items():
        if abs(l_in) <= record_l and abs(l_out) <= record_l:
            sig[l_in + record_l, l_out + record_l] = val
    try:
        p = polarization(s, pair=pair, side="right")
    except UndefinedPolarizationError:
        p = float("nan")
    return (
        total,
        sig,
        p,
        s.n_open,
        s.unitarity_residual(),
        s.flux_error(),
        s.threshold_flag,
    )


_WORKER_STATE: dict = {}


def _init_worker(op, pair, record_l):
    _WORKER_STATE["args"] = (op, pair, record_l)


def _point_worker(e1):
    op, pair, record_l = _WORKER_STATE["args"]
    try:
        return ("ok", _sweep_point(op, e1, pair, record_l))
    except NumericalError as exc:
        return ("err", str(exc))


def energy_sweep(plan: SweepPlan) -> ConductanceCurve:
    """Run the scattering problem over an energy grid.

    Per-point failures are recorded in ``failures`` and the sweep continues;
    results are deterministic and ordered by the energy grid regardless of the
    worker count.
    """
    op = plan.op
    energies = np.asarray(plan.energies, dtype=float)
    n_e = energies.size
    rec = np.arange(-plan.record_l, plan.record_l + 1)

    sigma_total = np.full(n_e, np.nan)
    sigma_modes = np.full((n_e, rec.size, rec.size), np.nan)
    p_lz = np.full(n_e, np.nan)
    n_open = np.zeros(n_e, dtype=int)
    unitarity = np.full(n_e, np.nan)
    flux = np.full(n_e, np.nan)
    flags = np.zeros(n_e, dtype=bool)
    failures: list = []

    def store(i, result):
        (
            sigma_total[i],
            sigma_modes[i],
            p_lz[i],
            n_open[i],
            unitarity[i],
            flux[i],
            flags[i],
        ) = result

    if plan.workers > 1:
        with ProcessPoolExecutor(
            max_workers=plan.workers,
            initializer=_init_worker,
            initargs=(op, plan.pair, plan.record_l),
        ) as pool:
            for i, (status, payload) in enumerate(pool.map(_point_worker, energies)):
                if status == "ok":
                    store(i, payload)
                else:
                    failures.append(
                        {"index": i, "e1": float(energies[i]), "error": payload}
                    )
    else:
        for i, e1 in enumerate(energies):
            try:
                store(i, _sweep_point(op, e1, plan.pair, plan.record_l))
            except NumericalError as exc:
                failures.append({"index": i, "e1": float(e1), "error": str(exc)})

    band_bottom = float(np.min(op.lead_offsets))
    return ConductanceCurve(
        energies=energies,
        energies_relative=energies - band_bottom,
        sigma_total=sigma_total,
        sigma_modes=sigma_modes,
        recorded_modes=rec,
        p_lz=p_lz,
        n_open=n_open,
        unitarity=unitarity,
        flux_error=flux,
        threshold_flags=flags,
        failures=failures,
        meta={
            "include_vg": op.include_vg,
            "pair": plan.pair,
            "sigma_index_order": "sigma[l_incident, l_outgoing]",
            "band_bottom": band_bottom,
        },
    )


def sweep_energies(
    e_min: float,
    e_max: float,
    n_points: int,
    thresholds: np.ndarray,
) -> np.ndarray:
    """Monotone energy grid nudged off exact channel thresholds.

    Points falling within 1e-9 of a threshold are shifted by half a grid
    step (thresholds are flagged, never interpolated over).
    """
    if n_points < 1 or e_max <= e_min:
        raise ValueError("need e_max > e_min and at least one point")
    grid = np.linspace(e_min, e_max, n_points)
    step = (e_max - e_min) / max(n_points - 1, 1)
    for i, e in enumerate(grid):
        if np.min(np.abs(e - thresholds)) < THRESHOLD_ATOL:
            grid[i] = e + 0.5 * step
    return grid
