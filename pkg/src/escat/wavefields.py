"""Cylindrical elastic wave bases and the Kupradze fundamental solution.

Conventions (frozen; the symmetry and energy identities depend on them):

* polar frame      e_r = (cos f, sin f),  e_t = (-sin f, cos f)
* vector harmonics P_m(x^) = e^{imf} e_r,  S_m(x^) = e^{imf} e_t
* scalar curl      curl w   = d1 w2 - d2 w1
* vector curl      Curl f   = (d2 f, -d1 f)
* pressure basis   JP_m = grad [J_m(kP r) e^{imf}]
                        = kP J_m'(kP r) P_m + (i m / r) J_m(kP r) S_m
* shear basis      JS_m = Curl [J_m(kS r) e^{imf}]
                        = (i m / r) J_m(kS r) P_m - kS J_m'(kS r) S_m
* HP_m, HS_m       same with H^(1)_m (outgoing, x != 0)
* plane-wave perp  d_perp = (d2, -d1) for incidence direction d
* traction         T u = lam (div u) n + mu (grad u + grad u^T) n

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError

__all__ = [
    "Material",
    "MaterialPair",
    "ModeIndex",
    "TractionCoeffs",
    "cyl_wave_J",
    "cyl_wave_H",
    "cyl_wave_traction",
    "plane_wave_coeffs",
    "plane_wave_field",
    "plane_wave_traction",
    "fundamental_solution",
    "traction_coeffs",
    "perp",
]


@dataclass(frozen=True)
class Material:
    """Isotropic elastic material: Lame pair plus density."""

    lam: float
    mu: float
    rho: float

    def __post_init__(self):
        if not (self.lam > 0 and self.mu > 0 and self.rho > 0):
            raise DomainError(
                f"material parameters must be positive, got "
                f"(lam={self.lam}, mu={self.mu}, rho={self.rho})"
            )

    @property
    def c_p(self) -> float:
        return float(np.sqrt((self.lam + 2.0 * self.mu) / self.rho))

    @property
    def c_s(self) -> float:
        return float(np.sqrt(self.mu / self.rho))

    def kappa_p(self, omega: float) -> float:
        return omega / self.c_p

    def kappa_s(self, omega: float) -> float:
        return omega / self.c_s

    def kappa(self, omega: float, mode: str) -> float:
        return self.kappa_p(omega) if mode == "P" else self.kappa_s(omega)

    def to_dict(self) -> dict:
        return {"lam": self.lam, "mu": self.mu, "rho": self.rho}

    @classmethod
    def from_dict(cls, d: dict) -> "Material":
        return cls(float(d["lam"]), float(d["mu"]), float(d["rho"]))


@dataclass(frozen=True)
class MaterialPair:
    """Exterior/interior materials for a penetrable inclusion.

    The contrast condition requires the Lame pairs to differ and the
    differences (lam0-lam1), (mu0-mu1) not to have opposite signs.
    """

    exterior: Material
    interior: Material

    def __post_init__(self):
        dl = self.exterior.lam - self.interior.lam
        dm = self.exterior.mu - self.interior.mu
        if dl * dl + dm * dm == 0.0:
            raise DomainError("contrast condition violated: identical Lame pairs")
        if dl * dm < 0.0:
            raise DomainError(
                "contrast condition violated: (lam0-lam1)(mu0-mu1) must be >= 0"
            )


@dataclass(frozen=True)
class ModeIndex:
    """Wave mode ('P' or 'S') and integer multipole order."""

    mode: str
    order: int

    def __post_init__(self):
        if self.mode not in ("P", "S"):
            raise DomainError(f"mode must be 'P' or 'S', got {self.mode!r}")


@dataclass(frozen=True)
class TractionCoeffs:
    """Modal surface-traction coefficients on a circle |x| = r.

    T H_n^a = (1/r^2) (B P_n + C S_n);  B_hat/C_hat are the J-based
    analogues (J_n replacing H^(1)_n).
    """

    B: complex
    C: complex
    B_hat: complex
    C_hat: complex


def perp(d: np.ndarray) -> np.ndarray:
    """Perpendicular (d2, -d1) used in the shear plane wave."""
    d = np.asarray(d, dtype=float)
    return np.array([d[1], -d[0]])


def _bessel_j(n: int, t):
    """J_n with parity folding for negative integer orders."""
    if n >= 0:
        return sp.jv(n, t)
    s = -1.0 if (-n) % 2 == 1 else 1.0
    return s * sp.jv(-n, t)


def _bessel_jp(n: int, t):
    if n >= 0:
        return sp.jvp(n, t)
    s = -1.0 if (-n) % 2 == 1 else 1.0
    return s * sp.jvp(-n, t)


def _hankel(n: int, t):
    if n >= 0:
        return sp.hankel1(n, t)
    s = -1.0 if (-n) % 2 == 1 else 1.0
    return s * sp.hankel1(-n, t)


def _hankelp(n: int, t):
    if n >= 0:
        return sp.h1vp(n, t)
    s = -1.0 if (-n) % 2 == 1 else 1.0
    return s * sp.h1vp(-n, t)


def _polar(points: np.ndarray):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    return pts, r, phi


def _field_from_radial(m, kappa, r, phi, z, zp):
    """Assemble kappa z' P_m + (im/r) z S_m in Cartesian components."""
    er = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    et = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    phase = np.exp(1j * m * phi)
    coeff_r = kappa * zp * phase
    coeff_t = (1j * m / r) * z * phase
    return coeff_r[:, None] * er + coeff_t[:, None] * et


def cyl_wave_J(idx: ModeIndex, point, material: Material, omega: float) -> np.ndarray:
    """Entire cylindrical eigenvector J^P_m or J^S_m at one or more points.

    Parameters
    ----------
    idx : ModeIndex
    point : array_like, shape (2,) or (N, 2)
    material, omega
        Fix the wavenumber kappa_mode = omega / c_mode.

    Returns
    -------
    np.ndarray, complex, shape like the input points
        Cartesian components.  At the origin the polar decomposition is
        singular but the field is entire; the series limit is used there
        (nonzero only for |m| = 1).
    """
    if omega <= 0:
        raise DomainError("omega must be positive")
    m = idx.order
    kappa = material.kappa(omega, idx.mode)
    pts, r, phi = _polar(point)
    out = np.zeros((len(r), 2), dtype=complex)
    at0 = r < 1e-14
    if np.any(~at0):
        rr = r[~at0]
        z = _bessel_j(m, kappa * rr)
        zp = _bessel_jp(m, kappa * rr)
        if idx.mode == "P":
            out[~at0] = _field_from_radial(m, kappa, rr, phi[~at0], z, zp)
        else:
            # JS_m = (im/r) J_m P_m - kappa J_m' S_m
            er = np.stack([np.cos(phi[~at0]), np.sin(phi[~at0])], axis=-1)
            et = np.stack([-np.sin(phi[~at0]), np.cos(phi[~at0])], axis=-1)
            phase = np.exp(1j * m * phi[~at0])
            out[~at0] = ((1j * m / rr) * z * phase)[:, None] * er - (
                kappa * zp * phase
            )[:, None] * et
    if np.any(at0):
        # grad[J_m(kr) e^{imf}] at 0: (k/2)(1, i) for m=1, -(k/2)(1, -i) for m=-1
        if m == 1:
            gp = 0.5 * kappa * np.array([1.0, 1j])
        elif m == -1:
            gp = -0.5 * kappa * np.array([1.0, -1j])
        else:
            gp = np.zeros(2, dtype=complex)
        if idx.mode == "P":
            out[at0] = gp
        else:
            out[at0] = np.array([gp[1], -gp[0]])
    return out[0] if np.asarray(point).ndim == 1 else out


def cyl_wave_H(idx: ModeIndex, point, material: Material, omega: float) -> np.ndarray:
    """Outgoing cylindrical eigenvector H^P_m or H^S_m (point != origin)."""
    if omega <= 0:
        raise DomainError("omega must be positive")
    m = idx.order
    kappa = material.kappa(omega, idx.mode)
    pts, r, phi = _polar(point)
    if np.any(r < 1e-14):
        raise DomainError("H-type wave functions are singular at the origin")
    z = _hankel(m, kappa * r)
    zp = _hankelp(m, kappa * r)
    if idx.mode == "P":
        out = _field_from_radial(m, kappa, r, phi, z, zp)
    else:
        er = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        et = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
        phase = np.exp(1j * m * phi)
        out = ((1j * m / r) * z * phase)[:, None] * er - (kappa * zp * phase)[
            :, None
        ] * et
    return out[0] if np.asarray(point).ndim == 1 else out


def _scalar_hessian_terms(m, kappa, r, phi, z, zp):
    """Cartesian Hessian of w(x) = Z_m(kappa r) e^{imf} from radial data.

    Z'' is eliminated with the Bessel ODE: Z'' = -Z'/t + (m^2/t^2 - 1) Z.
    Returns (w, H) with H of shape (N, 2, 2).
    """
    t = kappa * r
    phase = np.exp(1j * m * phi)
    w = z * phase
    w_r = kappa * zp * phase
    zpp = -zp / t + (m * m / (t * t) - 1.0) * z
    w_rr = kappa * kappa * zpp * phase
    w_rf = 1j * m * kappa * zp * phase
    w_ff = -(m * m) * w
    c, s = np.cos(phi), np.sin(phi)
    term_a = w_r / r + w_ff / (r * r)
    term_b = w_rf / r - 1j * m * w / (r * r)  # w_f = i m w
    h_xx = c * c * w_rr + s * s * term_a - 2 * s * c * term_b
    h_yy = s * s * w_rr + c * c * term_a + 2 * s * c * term_b
    h_xy = s * c * (w_rr - term_a) + (c * c - s * s) * term_b
    hess = np.empty(w.shape + (2, 2), dtype=complex)
    hess[..., 0, 0] = h_xx
    hess[..., 0, 1] = h_xy
    hess[..., 1, 0] = h_xy
    hess[..., 1, 1] = h_yy
    return w, hess


def cyl_wave_traction(
    idx: ModeIndex,
    point,
    normal,
    material: Material,
    omega: float,
    kind: str = "J",
) -> np.ndarray:
    """Surface traction of a cylindrical eigenvector on an arbitrary boundary.

    Evaluates T u = lam (div u) n + mu (grad u + grad u^T) n
    analytically (no finite differences) for u = J^a_m or H^a_m.

    Parameters
    ----------
    point, normal : array_like, shape (2,) or (N, 2)
        Evaluation points (away from the origin) and unit normals there.
    kind : 'J' or 'H'
        Entire or outgoing family.
    """
    m = idx.order
    kappa = material.kappa(omega, idx.mode)
    pts, r, phi = _polar(point)
    nrm = np.atleast_2d(np.asarray(normal, dtype=float))
    if np.any(r < 1e-14):
        raise DomainError("traction evaluation requires point != origin")
    if kind == "J":
        z, zp = _bessel_j(m, kappa * r), _bessel_jp(m, kappa * r)
    else:
        z, zp = _hankel(m, kappa * r), _hankelp(m, kappa * r)
    w, hess = _scalar_hessian_terms(m, kappa, r, phi, z, zp)
    lam, mu = material.lam, material.mu
    if idx.mode == "P":
        # u = grad w: div u = Lap w = -kappa^2 w, grad u = Hess w
        tr = -lam * kappa * kappa * w[:, None] * nrm + 2.0 * mu * np.einsum(
            "nij,nj->ni", hess, nrm
        )
    else:
        # u = Curl w = (d2 w, -d1 w): div u = 0,
        # grad u + grad u^T = [[2 w_xy, w_yy - w_xx], [w_yy - w_xx, -2 w_xy]]
        sym = np.empty_like(hess)
        sym[..., 0, 0] = 2.0 * hess[..., 0, 1]
        sym[..., 0, 1] = hess[..., 1, 1] - hess[..., 0, 0]
        sym[..., 1, 0] = sym[..., 0, 1]
        sym[..., 1, 1] = -2.0 * hess[..., 0, 1]
        tr = mu * np.einsum("nij,nj->ni", sym, nrm)
    return tr[0] if np.asarray(point).ndim == 1 else tr


def plane_wave_coeffs(
    direction, omega: float, material: Material, m_max: int
) -> dict[str, np.ndarray]:
    """Multipole coefficients a^b_m of the combined plane wave.

    a^b_m = -(i / (rho c_b^2 kappa_b)) e^{i m (pi/2 - theta_d)} for
    m = -m_max..m_max; |a^b_m| is independent of m.
    """
    d = np.asarray(direction, dtype=float)
    if abs(np.hypot(d[0], d[1]) - 1.0) > 1e-12:
        raise DomainError("direction must be a unit vector")
    theta_d = np.arctan2(d[1], d[0])
    m = np.arange(-m_max, m_max + 1)
    phase = np.exp(1j * m * (np.pi / 2.0 - theta_d))
    out = {}
    for mode, c in (("P", material.c_p), ("S", material.c_s)):
        kappa = omega / c
        out[mode] = -1j / (material.rho * c * c * kappa) * phase
    return out


def plane_wave_field(direction, point, material: Material, omega: float) -> np.ndarray:
    """Combined P+S plane wave with incidence direction d.

    u(x) = (1/(rho cS^2)) e^{i kS x.d} d_perp + (1/(rho cP^2)) e^{i kP x.d} d
    """
    d = np.asarray(direction, dtype=float)
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    xd = pts @ d
    up = (np.exp(1j * material.kappa_p(omega) * xd) / (material.rho * material.c_p**2))[
        :, None
    ] * d
    us = (np.exp(1j * material.kappa_s(omega) * xd) / (material.rho * material.c_s**2))[
        :, None
    ] * perp(d)
    out = up + us
    return out[0] if np.asarray(point).ndim == 1 else out


def _single_plane_wave(direction, point, material, omega, mode):
    """Pressure (amp d) or shear (amp d_perp) plane wave and its polarization."""
    d = np.asarray(direction, dtype=float)
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    kappa = material.kappa(omega, mode)
    c = material.c_p if mode == "P" else material.c_s
    v = d if mode == "P" else perp(d)
    amp = np.exp(1j * kappa * (pts @ d)) / (material.rho * c * c)
    return amp, v, kappa


def plane_wave_traction(
    direction, point, normal, material: Material, omega: float, mode: str
) -> np.ndarray:
    """Traction of the single-mode plane wave at points with given normals.

    For u = A v e^{i kappa x.d}:
    T u = i kappa A e^{i kappa x.d} [lam (v.d) n + mu ((d.n) v + (v.n) d)].
    """
    d = np.asarray(direction, dtype=float)
    nrm = np.atleast_2d(np.asarray(normal, dtype=float))
    amp, v, kappa = _single_plane_wave(direction, point, material, omega, mode)
    lam, mu = material.lam, material.mu
    vec = (
        lam * np.dot(v, d) * nrm
        + mu * (nrm @ d)[:, None] * v
        + mu * (nrm @ v)[:, None] * d
    )
    out = 1j * kappa * amp[:, None] * vec
    return out[0] if np.asarray(point).ndim == 1 else out


def plane_wave_mode_field(
    direction, point, material: Material, omega: float, mode: str
) -> np.ndarray:
    """Single-mode plane wave F (mode='P') or G (mode='S')."""
    amp, v, _ = _single_plane_wave(direction, point, material, omega, mode)
    out = amp[:, None] * v
    return out[0] if np.asarray(point).ndim == 1 else out


def fundamental_solution(x, y, omega: float, material: Material) -> np.ndarray:
    """Outgoing fundamental solution Gamma^w(x - y) of 2-D elastodynamics.

    Gamma = g_S I / mu + Hess(g_S - g_P) / (rho w^2) with
    g_a(r) = (i/4) H^(1)_0(kappa_a r); the Hessian is evaluated in closed
    form through H_0 and H_1 (no numerical differentiation).

    Accepts broadcastable point arrays; for x of shape (N,2) and y of
    shape (N,2) returns (N,2,2).
    """
    xv = np.atleast_2d(np.asarray(x, dtype=float))
    yv = np.atleast_2d(np.asarray(y, dtype=float))
    dv = xv - yv
    r = np.hypot(dv[..., 0], dv[..., 1])
    if np.any(r < 1e-14):
        raise DomainError("fundamental solution is singular at coincident points")
    out = _gamma_tensor(dv, r, omega, material)
    single = np.asarray(x).ndim == 1 and np.asarray(y).ndim == 1
    return out[0] if single else out


def _gamma_radial(r, omega, material):
    """phi(r), chi(r) with Gamma = phi I + chi rhat rhat^T."""
    kp, ks = material.kappa_p(omega), material.kappa_s(omega)
    rho_w2 = material.rho * omega * omega
    gs, gsp, gspp = _g_derivs(r, ks)
    gp, gpp_, gppp = _g_derivs(r, kp)
    phi = gs / material.mu + (gsp - gpp_) / (rho_w2 * r)
    chi = (gspp - gppp - (gsp - gpp_) / r) / rho_w2
    return phi, chi


def _g_derivs(r, kappa):
    """g, g', g'' for g(r) = (i/4) H_0(kappa r)."""
    t = kappa * r
    h0 = sp.hankel1(0, t)
    h1 = sp.hankel1(1, t)
    g = 0.25j * h0
    gp = -0.25j * kappa * h1
    gpp = -0.25j * kappa * kappa * (h0 - h1 / t)
    return g, gp, gpp


def _gamma_tensor(dv, r, omega, material):
    phi, chi = _gamma_radial(r, omega, material)
    rhat = dv / r[..., None]
    eye = np.eye(2)
    return phi[..., None, None] * eye + chi[..., None, None] * (
        rhat[..., :, None] * rhat[..., None, :]
    )


def _traction_bc(mode: str, n: int, t, lam: float, mu: float, z, zp):
    """Shared closed forms for the (B, C) traction pair; z = Z_n(t).

    The P-mode tangential and S-mode radial coefficients are the same
    function of (n, t, mu); it is implemented once.
    """
    coupling = 2j * mu * n * (t * zp - z)
    if mode == "P":
        b = -2.0 * mu * t * zp + (2.0 * mu * n * n - (lam + 2.0 * mu) * t * t) * z
        c = coupling
    else:
        b = coupling
        c = 2.0 * mu * t * zp + (mu * t * t - 2.0 * mu * n * n) * z
    return b, c


def traction_coeffs(
    idx: ModeIndex, radius: float, material: Material, omega: float
) -> TractionCoeffs:
    """Modal traction coefficients of H^a_n and J^a_n on |x| = radius.

    T_{lam,mu} Z^a_n = (1/r^2) (B P_n + C S_n) at t = radius * kappa_a;
    B_hat/C_hat are the J-based values.  C^P_n and B^S_n are the same
    function (single shared implementation), and both vanish at n = 0.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    n = idx.order
    t = radius * material.kappa(omega, idx.mode)
    h, hp = _hankel(n, t), _hankelp(n, t)
    j, jp = _bessel_j(n, t), _bessel_jp(n, t)
    b, c = _traction_bc(idx.mode, n, t, material.lam, material.mu, h, hp)
    bh, ch = _traction_bc(idx.mode, n, t, material.lam, material.mu, j, jp)
    return TractionCoeffs(B=b, C=c, B_hat=bh, C_hat=ch)
