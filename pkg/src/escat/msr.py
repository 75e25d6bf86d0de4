"""Multi-static acquisition, the structured data model and reconstruction.

Sources and receivers sit uniformly on a circle of radius R.  Source s
emits pressure/shear plane waves with incidence direction d_s = -x_s/R;
receiver r projects the scattered field on d_r = e_r(theta_r) and
d_r_perp = e_theta(theta_r).  With

    X^b[s, m] = d^b_m(s) = e^{i m (pi/2 - theta_ds)} / b_b,
    b_b = 4 rho0^2 w^2 c_b^2 kappa_b,
    Y^a_par[r, n]  = conj(H^a_n(x_r)) . d_r,
    Y^a_perp[r, n] = conj(H^a_n(x_r)) . d_r_perp,

the four response matrices assemble into A = X G Y* + E (+ noise) where
G is the global ESC matrix with incident-index rows, and E is the
truncation error.  X*X = N_s Z_X holds exactly (Fourier orthogonality)
while Y*Y approaches N_r Z_Y with O(R^-2) off-diagonal blocks, giving
the explicit left pseudo-inverse used for reconstruction.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass

import numpy as np

from .bie import TransmissionSolver, build_grid
from .curves import BoundaryCurve
from .errors import DomainError, ReconstructionError
from .esc import EscMatrix, compute_esc
from .wavefields import (
    Material,
    MaterialPair,
    _gamma_tensor,
    plane_wave_mode_field,
    plane_wave_traction,
)
from .specialfun import hankel1_sequence

logger = logging.getLogger(__name__)

MODES = ("P", "S")


@dataclass(frozen=True)
class MsrConfig:
    """Circular full-aperture acquisition geometry."""

    radius: float
    n_sources: int
    n_receivers: int
    omega: float
    exterior: Material
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.radius <= 0 or self.omega <= 0:
            raise DomainError("radius and omega must be positive")
        if self.n_sources < 1 or self.n_receivers < 1:
            raise DomainError("need at least one source and receiver")
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be nonnegative")

    def source_angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_sources) / self.n_sources

    def receiver_angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_receivers) / self.n_receivers

    def receiver_points(self) -> np.ndarray:
        th = self.receiver_angles()
        return self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def incident_directions(self) -> np.ndarray:
        th = self.source_angles()
        return -np.stack([np.cos(th), np.sin(th)], axis=-1)

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "n_sources": self.n_sources,
            "n_receivers": self.n_receivers,
            "omega": self.omega,
            "exterior": self.exterior.to_dict(),
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MsrConfig":
        return cls(
            radius=float(d["radius"]),
            n_sources=int(d["n_sources"]),
            n_receivers=int(d["n_receivers"]),
            omega=float(d["omega"]),
            exterior=Material.from_dict(d["exterior"]),
            noise_sigma=float(d.get("noise_sigma", 0.0)),
            seed=int(d.get("seed", 0)),
        )


@dataclass
class MsrDataset:
    """Four N_s x N_r response matrices plus the acquisition geometry."""

    a_par_par: np.ndarray
    a_par_perp: np.ndarray
    a_perp_par: np.ndarray
    a_perp_perp: np.ndarray
    config: MsrConfig

    def stacked(self) -> np.ndarray:
        """Global 2N_s x 2N_r block matrix [[par,par  par,perp], ...]."""
        return np.block(
            [[self.a_par_par, self.a_par_perp], [self.a_perp_par, self.a_perp_perp]]
        )

    @classmethod
    def from_stacked(cls, a: np.ndarray, config: MsrConfig) -> "MsrDataset":
        ns, nr = config.n_sources, config.n_receivers
        return cls(
            a_par_par=a[:ns, :nr].copy(),
            a_par_perp=a[:ns, nr:].copy(),
            a_perp_par=a[ns:, :nr].copy(),
            a_perp_perp=a[ns:, nr:].copy(),
            config=config,
        )

    def save(self, prefix) -> None:
        """JSON header + four CSV matrices (s, r, re, im), written atomically."""
        import io
        import pathlib

        from .config import atomic_write_json, atomic_write_text

        prefix = pathlib.Path(prefix)
        atomic_write_json(f"{prefix}.json", {"config": self.config.to_dict()})
        names = {
            "par_par": self.a_par_par,
            "par_perp": self.a_par_perp,
            "perp_par": self.a_perp_par,
            "perp_perp": self.a_perp_perp,
        }
        for name, mat in names.items():
            buf = io.StringIO()
            wr = csv.writer(buf)
            wr.writerow(["s", "r", "re", "im"])
            for s in range(mat.shape[0]):
                for r in range(mat.shape[1]):
                    wr.writerow([s, r, repr(float(mat[s, r].real)), repr(float(mat[s, r].imag))])
            atomic_write_text(f"{prefix}_{name}.csv", buf.getvalue())

    @classmethod
    def load(cls, prefix) -> "MsrDataset":
        with open(f"{prefix}.json") as f:
            config = MsrConfig.from_dict(json.load(f)["config"])
        mats = {}
        for name in ("par_par", "par_perp", "perp_par", "perp_perp"):
            rows = {}
            with open(f"{prefix}_{name}.csv") as f:
                rd = csv.reader(f)
                next(rd)
                for s, r, re, im in rd:
                    rows[(int(s), int(r))] = complex(float(re), float(im))
            ns = max(k[0] for k in rows) + 1
            nr = max(k[1] for k in rows) + 1
            mat = np.empty((ns, nr), dtype=complex)
            for (s, r), v in rows.items():
                mat[s, r] = v
            mats[name] = mat
        return cls(
            a_par_par=mats["par_par"],
            a_par_perp=mats["par_perp"],
            a_perp_par=mats["perp_par"],
            a_perp_perp=mats["perp_perp"],
            config=config,
        )


@dataclass
class ModelMatrices:
    """X, Y and the diagonal normalizations Z_X, Z_Y (as 1-D arrays)."""

    X: np.ndarray
    Y: np.ndarray
    z_x: np.ndarray
    z_y: np.ndarray
    K: int


def _b_factor(material: Material, omega: float, mode: str) -> float:
    c = material.c_p if mode == "P" else material.c_s
    return 4.0 * material.rho**2 * omega**2 * c * c * material.kappa(omega, mode)


def _gh_factors(config: MsrConfig, K: int):
    """g^a_n and h^a_n tables over n = -K..K at the receiver radius."""
    ext, omega, R = config.exterior, config.omega, config.radius
    out = {}
    for mode in MODES:
        kappa = ext.kappa(omega, mode)
        h, hp = hankel1_sequence(K, kappa * R)
        n = np.arange(-K, K + 1)
        habs = np.concatenate([((-1.0) ** np.arange(K, 0, -1)) * h[K:0:-1], h])
        hpabs = np.concatenate([((-1.0) ** np.arange(K, 0, -1)) * hp[K:0:-1], hp])
        if mode == "P":
            out["gP"] = kappa * hpabs
            out["hP"] = (1j * n / R) * habs
        else:
            out["gS"] = (1j * n / R) * habs
            out["hS"] = -kappa * hpabs
    return out


def assemble_model(config: MsrConfig, K: int) -> ModelMatrices:
    """Model matrices for truncation K; requires 2K+1 <= min(N_s, N_r)."""
    if 2 * K + 1 > min(config.n_sources, config.n_receivers):
        raise DomainError("truncation K violates 2K+1 <= min(N_s, N_r)")
    ns, nr = config.n_sources, config.n_receivers
    n = np.arange(-K, K + 1)
    theta_d = config.source_angles() + np.pi
    x = np.zeros((2 * ns, 4 * K + 2), dtype=complex)
    for ib, mode in enumerate(MODES):
        b = _b_factor(config.exterior, config.omega, mode)
        x[ib * ns : (ib + 1) * ns, ib * (2 * K + 1) : (ib + 1) * (2 * K + 1)] = (
            np.exp(1j * np.outer(np.pi / 2.0 - theta_d, n)) / b
        )
    th_r = config.receiver_angles()
    gh = _gh_factors(config, K)
    phase = np.exp(-1j * np.outer(th_r, n))
    y = np.zeros((2 * nr, 4 * K + 2), dtype=complex)
    y[:nr, : 2 * K + 1] = np.conj(gh["gP"])[None, :] * phase
    y[:nr, 2 * K + 1 :] = np.conj(gh["gS"])[None, :] * phase
    y[nr:, : 2 * K + 1] = np.conj(gh["hP"])[None, :] * phase
    y[nr:, 2 * K + 1 :] = np.conj(gh["hS"])[None, :] * phase
    z_x = np.concatenate(
        [
            np.full(2 * K + 1, 1.0 / _b_factor(config.exterior, config.omega, "P") ** 2),
            np.full(2 * K + 1, 1.0 / _b_factor(config.exterior, config.omega, "S") ** 2),
        ]
    )
    z_y = np.concatenate([np.abs(gh["gP"]) ** 2, np.abs(gh["hS"]) ** 2])
    return ModelMatrices(X=x, Y=y, z_x=z_x, z_y=z_y, K=K)


def simulate_msr(
    curve: BoundaryCurve,
    pair: MaterialPair,
    config: MsrConfig,
    mode: str = "bie",
    K: int | None = None,
    esc: EscMatrix | None = None,
    n_nodes: int = 256,
) -> MsrDataset:
    """Simulate the four response matrices.

    mode='bie' solves the transmission problem per plane-wave incidence
    (ground truth, all multipole orders); mode='expansion' evaluates the
    truncated model X G Y* exactly at order K (model-error free), using
    the supplied EscMatrix or computing one.
    """
    if mode == "expansion":
        if K is None and esc is None:
            raise DomainError("expansion mode needs K or an EscMatrix")
        if esc is None:
            esc = compute_esc(curve, pair, config.omega, K=K, n_nodes=n_nodes)
        model = assemble_model(config, esc.K)
        a = model.X @ esc.to_global() @ model.Y.conj().T
        return MsrDataset.from_stacked(a, config)
    if mode != "bie":
        raise DomainError(f"unknown simulation mode {mode!r}")

    ext = pair.exterior
    omega = config.omega
    grid = build_grid(curve, n_nodes)
    solver = TransmissionSolver(grid, pair, omega)
    dirs = config.incident_directions()
    traces, tractions = [], []
    for mode_w in MODES:
        for d in dirs:
            traces.append(plane_wave_mode_field(d, grid.nodes, ext, omega, mode_w))
            tractions.append(
                plane_wave_traction(d, grid.nodes, grid.normals, ext, omega, mode_w)
            )
    densities = solver.solve_many(np.asarray(traces), np.asarray(tractions))

    rec = config.receiver_points()
    dv = rec[:, None, :] - grid.nodes[None, :, :]
    r = np.hypot(dv[..., 0], dv[..., 1])
    gam = _gamma_tensor(dv, r, omega, ext)  # (Nr, n, 2, 2)
    w = grid.weights
    th_r = config.receiver_angles()
    d_r = np.stack([np.cos(th_r), np.sin(th_r)], axis=-1)
    d_rp = np.stack([-np.sin(th_r), np.cos(th_r)], axis=-1)

    ns, nr = config.n_sources, config.n_receivers
    a = np.empty((2 * ns, 2 * nr), dtype=complex)
    for k, dens in enumerate(densities):
        u = np.einsum("rjkl,jl,j->rk", gam, dens.psi, w)
        row = k % ns
        block = k // ns  # 0: P sources (par rows), 1: S sources (perp rows)
        a[block * ns + row, :nr] = np.einsum("rk,rk->r", u, d_r)
        a[block * ns + row, nr:] = np.einsum("rk,rk->r", u, d_rp)
    return MsrDataset.from_stacked(a, config)


def add_noise(data: MsrDataset) -> MsrDataset:
    """Add iid complex Gaussian noise with std config.noise_sigma per entry."""
    cfg = data.config
    if cfg.noise_sigma == 0.0:
        return MsrDataset.from_stacked(data.stacked(), cfg)
    rng = np.random.default_rng(cfg.seed)
    shape = (2 * cfg.n_sources, 2 * cfg.n_receivers)
    noise = (
        cfg.noise_sigma
        * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        / np.sqrt(2.0)
    )
    return MsrDataset.from_stacked(data.stacked() + noise, cfg)


def _rank_check(mat: np.ndarray, what: str) -> None:
    s = np.linalg.svd(mat, compute_uv=False)
    if s[-1] < 1e-12 * s[0]:
        raise ReconstructionError(f"{what} is numerically rank deficient")


def reconstruct(
    data: MsrDataset,
    K: int,
    method: str = "pseudo_inverse",
    n_projection_iters: int = 20,
    projection_step: float = 0.5,
) -> tuple[EscMatrix, dict]:
    """Estimate the truncated ESC matrix from response data.

    pseudo_inverse : What = Z_X^-1 X* A Y Z_Y^-1 / (N_s N_r)  (explicit
                     left pseudo-inverse, exact as R -> infinity)
    lsq            : normal equations with the full Y*Y (no large-R
                     diagonal approximation)
    lsq_constrained: lsq followed by damped alternating projection onto
                     the reciprocity symmetry and the energy identity
                     (heuristic regularization of the ill-posed tail)
    """
    cfg = data.config
    if 2 * K + 1 > min(cfg.n_sources, cfg.n_receivers):
        raise DomainError("truncation K violates 2K+1 <= min(N_s, N_r)")
    model = assemble_model(cfg, K)
    a = data.stacked()
    _rank_check(model.X, "X")
    _rank_check(model.Y, "Y")
    if method == "pseudo_inverse":
        g = (
            (model.X.conj().T @ a @ model.Y)
            / (cfg.n_sources * cfg.n_receivers)
            / model.z_x[:, None]
            / model.z_y[None, :]
        )
    elif method in ("lsq", "lsq_constrained"):
        xtx = model.X.conj().T @ model.X
        yty = model.Y.conj().T @ model.Y
        g = np.linalg.solve(xtx, model.X.conj().T @ a @ model.Y)
        g = np.linalg.solve(yty.T, g.T).T
        if method == "lsq_constrained":
            g = _project_constraints(
                g, cfg, K, n_iters=n_projection_iters, step=projection_step
            )
    else:
        raise DomainError(f"unknown reconstruction method {method!r}")
    est = EscMatrix.from_global(g, cfg.omega, rho0=cfg.exterior.rho)
    resid = np.linalg.norm(model.X @ g @ model.Y.conj().T - a) / max(
        np.linalg.norm(a), 1e-300
    )
    report = {
        "method": method,
        "K": K,
        "relative_data_residual": float(resid),
    }
    return est, report


def _reciprocity_projection(g: np.ndarray, K: int) -> np.ndarray:
    """Average G with its reciprocity image (exact symmetry of the ESC)."""
    k = 2 * K + 1
    out = g.copy()
    for ib in range(2):
        for ia in range(2):
            blk = g[ib * k : (ib + 1) * k, ia * k : (ia + 1) * k]
            # W^{a,b}_{m,n} = (-1)^{m+n} W^{b,a}_{-n,-m}
            swap = g[ia * k : (ia + 1) * k, ib * k : (ib + 1) * k]
            m = np.arange(-K, K + 1)
            signs = (-1.0) ** (m[:, None] + m[None, :])
            image = signs * swap[::-1, ::-1].T
            out[ib * k : (ib + 1) * k, ia * k : (ia + 1) * k] = 0.5 * (blk + image)
    return out


def _project_constraints(g, cfg, K, n_iters=20, step=0.5):
    rho_w2 = cfg.exterior.rho * cfg.omega**2
    for _ in range(n_iters):
        g = _reciprocity_projection(g, K)
        res = g @ g.conj().T / (4.0 * rho_w2) + 0.5j * (g - g.conj().T)
        # move along the anti-Hermitian direction that cancels the residual
        g = g - step * (-2.0j) * 0.5 * (res + res.conj().T)
    return g


def singular_values(config: MsrConfig, K: int, numeric: bool = False) -> dict:
    """Singular values of the data map M -> X M Y* and condition estimate.

    Closed form: sigma_pq = sqrt(N_s N_r) |f_p| |gh_q| with |f_p| = 1/b
    of the p-half mode and gh_q the g^P / h^S factor of the q-half; the
    numeric SVD of the flattened operator is the finite-R cross-check
    (memory-guarded to K <= 6).
    """
    model = assemble_model(config, K)
    ns, nr = config.n_sources, config.n_receivers
    col_x = np.sqrt(config.n_sources * model.z_x)
    col_y = np.sqrt(config.n_receivers * model.z_y)
    sigma = col_x[:, None] * col_y[None, :]
    out = {
        "sigma_closed_form": sigma,
        "sigma_max": float(sigma.max()),
        "sigma_min": float(sigma.min()),
        "condition": float(sigma.max() / sigma.min()),
    }
    kappa_p = config.exterior.kappa_p(config.omega)
    c_r = 2.0 / (np.e * kappa_p * config.radius)
    out["condition_envelope"] = float((c_r * max(K, 1)) ** (K + 1))
    if numeric:
        if K > 6:
            raise DomainError("numeric SVD limited to K <= 6 (memory guard)")
        flat = np.kron(model.X, np.conj(model.Y))
        out["sigma_numeric"] = np.linalg.svd(flat, compute_uv=False)
    return out


def max_resolving_order(snr: float, epsilon: float) -> int:
    """Largest K with K^(K-1) <= epsilon * SNR."""
    if snr <= 0 or epsilon <= 0:
        raise DomainError("snr and epsilon must be positive")
    bound = epsilon * snr
    if bound < 1.0:
        return 0
    k = 1
    while (k + 1) ** k <= bound:
        k += 1
    return k


def snr_estimate(perimeter: float, radius: float, noise_sigma: float) -> float:
    """Signal-to-noise ratio (|dD| / sqrt(R)) / sigma_noise."""
    if noise_sigma <= 0:
        raise DomainError("noise_sigma must be positive for an SNR")
    return perimeter / np.sqrt(radius) / noise_sigma
