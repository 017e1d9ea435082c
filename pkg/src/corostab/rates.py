"""Kinematics of homogeneous motions and objective stress rates.

A MotionSample carries (F, Fdot, Fddot) at one instant; every rate or
second-derivative identity evaluated here depends on the motion only through
those three tensors, so nearby times are reconstructed by second-order Taylor
expansion without loss.  For diagonal motions the spin vanishes and every
corotational rate collapses to the material time derivative, which is what
makes the principal-stress rate form checkable.

Energy-based quantities (first Piola stress, rank-two derivative along the
velocity) are obtained by finite differences on the energy in matrix
directions, deliberately independent of the analytic stress formulas they are
tested against.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvalidInputError, UsageError
from .materials import MaterialModel, cauchy_from_B, energy_from_F
from .tensor3 import skew, sym

__all__ = [
    "MotionSample",
    "SpinChoice",
    "cauchy_of_F",
    "corotational_rate",
    "csp_rate_form",
    "energy_second_time_derivative",
    "first_piola_fd",
    "motion_from_stretch_path",
    "power_identity",
    "second_order_work_identity",
]

_HT = 1e-6  # time step for first-order stress rates (with one Richardson level)


@dataclass(frozen=True)
class MotionSample:
    """Deformation gradient and its first two time derivatives at an instant."""

    F: np.ndarray
    Fdot: np.ndarray
    Fddot: np.ndarray

    def __post_init__(self):
        for name in ("F", "Fdot", "Fddot"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"{name} must be a finite 3x3 tensor")
            object.__setattr__(self, name, arr)
        if np.linalg.det(self.F) <= 0.0:
            raise DomainError("motion requires det F > 0")

    @property
    def J(self):
        return float(np.linalg.det(self.F))

    @property
    def L(self):
        return self.Fdot @ np.linalg.inv(self.F)

    @property
    def D(self):
        return sym(self.L)

    @property
    def W_spin(self):
        return skew(self.L)

    @property
    def is_diagonal(self):
        scale = max(1.0, float(np.max(np.abs(self.F))), float(np.max(np.abs(self.Fdot))))
        off = sum(
            float(np.max(np.abs(A - np.diag(np.diag(A)))))
            for A in (self.F, self.Fdot, self.Fddot)
        )
        return off <= 1e-12 * scale

    def F_at(self, s):
        """Second-order Taylor reconstruction of F(t + s)."""
        return self.F + s * self.Fdot + 0.5 * s * s * self.Fddot


@dataclass(frozen=True)
class SpinChoice:
    """Spin tensor selection for a corotational rate."""

    kind: str
    omega: np.ndarray | None = None

    @classmethod
    def material(cls):
        return cls("material")

    @classmethod
    def zaremba_jaumann(cls):
        return cls("zaremba_jaumann")

    @classmethod
    def custom(cls, omega):
        omega = np.asarray(omega, dtype=float)
        if np.max(np.abs(omega + omega.T)) > 1e-12 * max(1.0, np.max(np.abs(omega))):
            raise UsageError("custom spin tensor must be skew-symmetric")
        return cls("custom", omega)

    def resolve(self, L):
        if self.kind == "material":
            return np.zeros((3, 3))
        if self.kind == "zaremba_jaumann":
            if L is None:
                raise UsageError("zaremba_jaumann spin needs the velocity gradient")
            return skew(L)
        if self.kind == "custom":
            return self.omega
        raise UsageError(f"unknown spin kind '{self.kind}'")


def motion_from_stretch_path(paths: Sequence[Sequence[Callable]], t: float) -> MotionSample:
    """Diagonal motion from three per-axis stretch paths, each given as a
    (value, first derivative, second derivative) triple of callables of t."""
    if len(paths) != 3:
        raise InvalidInputError("need three stretch paths")
    lam = np.array([float(p[0](t)) for p in paths])
    lamd = np.array([float(p[1](t)) for p in paths])
    lamdd = np.array([float(p[2](t)) for p in paths])
    if np.any(lam <= 0.0):
        raise DomainError(f"stretch path non-positive at t = {t}: {lam}")
    return MotionSample(F=np.diag(lam), Fdot=np.diag(lamd), Fddot=np.diag(lamdd))


def corotational_rate(sigma_dot, sigma, spin: SpinChoice, L, biezeno_hencky=False):
    """sigma_dot + sigma Omega - Omega sigma for the chosen spin; with the
    ``biezeno_hencky`` flag the non-corotational term sigma tr(D) is added."""
    sigma = np.asarray(sigma, dtype=float)
    sigma_dot = np.asarray(sigma_dot, dtype=float)
    omega = spin.resolve(L)
    out = sigma_dot + sigma @ omega - omega @ sigma
    if biezeno_hencky:
        if L is None:
            raise UsageError("the volumetric rate term needs the velocity gradient")
        out = out + sigma * np.trace(sym(L))
    return out


def cauchy_of_F(model: MaterialModel, F):
    return cauchy_from_B(model, np.asarray(F, dtype=float) @ np.asarray(F, dtype=float).T)


def _dt_richardson(f, h=_HT):
    """d/ds f(s) at s = 0, central differences at h and h/2 combined."""
    d1 = (f(h) - f(-h)) / (2.0 * h)
    d2 = (f(0.5 * h) - f(-0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def _require_compressible(model):
    if model.incompressible:
        raise UsageError(
            f"model '{model.kind}' is incompressible; rate identities need the "
            "pointwise stress, which requires a pressure history"
        )


def csp_rate_form(model: MaterialModel, motion: MotionSample):
    """Both routes to <d sigma / dt, D> for a diagonal motion.

    lhs differentiates the principal Cauchy stresses in time by central
    differences along the (Taylor-reconstructed) stretch path; rhs applies the
    chain rule through the analytic stress-stretch derivatives and sums
    d_t[sigma_i] * lamdot_i / lam_i.  Returns (lhs, rhs, |lhs - rhs|).
    """
    _require_compressible(model)
    if not motion.is_diagonal:
        raise UsageError("the principal rate form needs a diagonal motion")
    lam = np.diag(motion.F)
    lamd = np.diag(motion.Fdot)
    lamdd = np.diag(motion.Fddot)
    rate = lamd / lam

    def sigma_p(s):
        lam_s = lam + s * lamd + 0.5 * s * s * lamdd
        return model.cauchy_principal(np.log(lam_s))

    sig_dot = _dt_richardson(sigma_p)
    lhs = float(np.sum(sig_dot * rate))

    # chain rule: d sigma_i / d lam_j = e^{-s}(H_ij - tau_i) / lam_j
    x = np.log(lam)
    tau = model.ghat_grad(x)
    hess = model.ghat_hess(x)
    dsig_dlam = np.exp(-np.sum(x)) * (hess - tau[:, None]) / lam[None, :]
    sig_dot_chain = dsig_dlam @ lamd
    rhs = float(np.sum(sig_dot_chain * rate))
    return lhs, rhs, abs(lhs - rhs)


def first_piola_fd(model: MaterialModel, F):
    """First Piola stress D_F W by central differences on the energy in the
    nine matrix directions (one Richardson level)."""
    _require_compressible(model)
    F = np.asarray(F, dtype=float)
    h = 1e-6 * max(1.0, float(np.max(np.abs(F))))
    steps = np.array([h, -h, 0.5 * h, -0.5 * h])
    pert = np.repeat(F[None], 36, axis=0).reshape(9, 4, 3, 3)
    for c in range(9):
        i, j = divmod(c, 3)
        pert[c, :, i, j] += steps
    W = energy_from_F(model, pert.reshape(-1, 3, 3)).reshape(9, 4)
    d1 = (W[:, 0] - W[:, 1]) / (2.0 * h)
    d2 = (W[:, 2] - W[:, 3]) / h
    return ((4.0 * d2 - d1) / 3.0).reshape(3, 3)


def _d2_along(model, F, X, scale=1.0):
    """5-point second derivative of s -> W(F + s X) at s = 0."""
    h = 1e-3 * (1.0 + float(np.linalg.norm(F))) / max(1.0, float(np.linalg.norm(X))) * scale
    Fs = np.stack([F + s * h * X for s in (-2.0, -1.0, 0.0, 1.0, 2.0)])
    W = energy_from_F(model, Fs)
    return float((-W[0] + 16 * W[1] - 30 * W[2] + 16 * W[3] - W[4]) / (12.0 * h * h))


def power_identity(model: MaterialModel, motion: MotionSample):
    """<S1, Fdot> against J <sigma, D>; returns (lhs, rhs, |lhs - rhs|)."""
    _require_compressible(model)
    S1 = first_piola_fd(model, motion.F)
    lhs = float(np.sum(S1 * motion.Fdot))
    sig = cauchy_of_F(model, motion.F)
    rhs = float(motion.J * np.sum(sig * motion.D))
    return lhs, rhs, abs(lhs - rhs)


def second_order_work_identity(model: MaterialModel, motion: MotionSample):
    """Referential and spatial forms of the second time derivative of the
    energy density (per unit reference volume) for a homogeneous motion.

    referential = D^2 W(F).(Fdot, Fdot) + <S1, Fddot>, both factors by finite
    differences on the energy; spatial = J (<sigma_dot, D> + <sigma, Ddot> +
    <sigma, D> tr D) with sigma from the constitutive law and sigma_dot by
    time differencing.  Returns (referential, spatial, |difference|).
    """
    _require_compressible(model)
    F = motion.F
    ref = _d2_along(model, F, motion.Fdot) + float(np.sum(first_piola_fd(model, F) * motion.Fddot))

    Finv = np.linalg.inv(F)
    L = motion.Fdot @ Finv
    D = sym(L)
    Ddot = sym(motion.Fddot @ Finv - L @ L)
    sig = cauchy_of_F(model, F)

    sig_dot = _dt_richardson(lambda s: cauchy_of_F(model, motion.F_at(s)))
    spatial = float(
        motion.J
        * (np.sum(sig_dot * D) + np.sum(sig * Ddot) + np.sum(sig * D) * np.trace(D))
    )
    return ref, spatial, abs(ref - spatial)


def energy_second_time_derivative(model: MaterialModel, motion: MotionSample):
    """Direct 5-point second derivative of t -> W(F(t)) on the Taylor path;
    independent oracle for both routes of second_order_work_identity."""
    _require_compressible(model)
    rate = max(1.0, float(np.linalg.norm(motion.Fdot)) + float(np.linalg.norm(motion.Fddot)))
    h = 1e-3 * (1.0 + float(np.linalg.norm(motion.F))) / rate
    W = np.array([energy_from_F(model, motion.F_at(s * h)) for s in (-2, -1, 0, 1, 2)])
    return float((-W[0] + 16 * W[1] - 30 * W[2] + 16 * W[3] - W[4]) / (12.0 * h * h))
