"""Probe states, priors and isometry families.

Two families are built in: the controlled rotation dilating the qubit
phase damping channel, and the core two-qubit entangling unitaries
``exp[-i/2 (s_x XX + s_y YY + s_z ZZ)]`` with one of the three angles
unknown.  Both act on ``probe (x) |0><0|_E`` and produce a state on
``B (x) F``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .matlin import DimensionError, partial_trace

__all__ = [
    "ProbeState",
    "Prior",
    "IsometryFamily",
    "CoreUnitaryTarget",
    "probe_density",
    "phase_damp_family",
    "core_entangling_family",
    "core_unitary",
    "joint_output",
    "joint_outputs",
    "output_B",
    "output_F",
    "check_isometry",
    "explicit_u",
    "explicit_rho_b",
    "explicit_rho_f",
    "explicit_rho",
]

HALF_PI = 0.5 * np.pi
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProbeState:
    """Pure qubit probe ``sqrt(g)|0> + e^{i phi} sqrt(1-g)|1>``."""

    gamma: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.phi <= _TWO_PI + 1e-12:
            raise ValueError(f"phi must lie in [0, 2pi], got {self.phi}")

    def ket(self) -> np.ndarray:
        return np.array(
            [np.sqrt(self.gamma), np.exp(1j * self.phi) * np.sqrt(1.0 - self.gamma)],
            dtype=complex,
        )

    def density(self) -> np.ndarray:
        v = self.ket()
        return np.outer(v, v.conj())


def probe_density(p: ProbeState) -> np.ndarray:
    return p.density()


@dataclass(frozen=True)
class Prior:
    """Prior density on ``[lower, upper]``.

    ``weight=None`` means the uniform density.  Integrals are taken with
    Gauss-Legendre quadrature on ``quadrature_nodes`` nodes.
    """

    lower: float
    upper: float
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None
    quadrature_nodes: int = 64

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)) or not self.lower < self.upper:
            raise ValueError(f"invalid prior interval [{self.lower}, {self.upper}]")
        if self.quadrature_nodes < 1:
            raise ValueError("quadrature_nodes must be positive")
        if self.weight is not None:
            total = float(np.sum(self.rule[1]))
            if abs(total - 1.0) > 1e-10:
                raise ValueError(f"prior density integrates to {total!r}, not 1")

    @cached_property
    def rule(self):
        """``(nodes, weights)`` with the density folded into the weights."""
        x, w = leggauss(self.quadrature_nodes)
        half = 0.5 * (self.upper - self.lower)
        s = half * x + 0.5 * (self.upper + self.lower)
        w = w * half
        if self.weight is None:
            p = np.full_like(s, 1.0 / (self.upper - self.lower))
        else:
            p = np.asarray(self.weight(s), dtype=float)
            if np.any(p < 0):
                raise ValueError("prior density must be non-negative")
        return s, w * p

    def with_nodes(self, n: int) -> "Prior":
        return Prior(self.lower, self.upper, self.weight, n)

    def contains(self, s: float, slack: float = 1e-12) -> bool:
        return self.lower - slack <= s <= self.upper + slack

    @property
    def mean(self) -> float:
        s, w = self.rule
        return float(np.dot(w, s))

    @property
    def second_moment(self) -> float:
        s, w = self.rule
        return float(np.dot(w, s * s))

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean ** 2


@dataclass(frozen=True)
class IsometryFamily:
    """``s -> V_s : H_A -> H_B (x) H_F``.

    ``v_batch`` maps a 1-d array of parameter values to an array of shape
    ``(n, dB*dF, dA)``.
    """

    dA: int
    dB: int
    dF: int
    prior: Prior
    v_batch: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    label: str = "custom"

    def v_of_s(self, s: float) -> np.ndarray:
        return self.v_batch(np.array([float(s)]))[0]

    @property
    def dims(self):
        return (self.dB, self.dF)

    def with_prior(self, prior: Prior) -> "IsometryFamily":
        return IsometryFamily(self.dA, self.dB, self.dF, prior, self.v_batch, self.label)


# ---------------------------------------------------------------- families

_I2 = np.eye(2, dtype=complex)
_P0 = np.diag([1.0, 0.0]).astype(complex)
_P1 = np.diag([0.0, 1.0]).astype(complex)
_SY = np.array([[0, -1j], [1j, 0]])
_ENV0 = np.array([[1.0], [0.0]], dtype=complex)
# U (x) |0>_E as a column selection: V = U[:, [0, 2]] for qubit A, E
_EMBED = np.kron(_I2, _ENV0)


def _controlled_rotation(s: np.ndarray) -> np.ndarray:
    c = np.cos(s)[:, None, None]
    sn = np.sin(s)[:, None, None]
    rot = c * _I2 + 1j * sn * _SY
    return np.kron(_P0, _I2)[None] + np.einsum("ij,nkl->nikjl", _P1, rot).reshape(-1, 4, 4)


def phase_damp_family(prior: Optional[Prior] = None) -> IsometryFamily:
    """Controlled rotation ``|0><0| (x) I + |1><1| (x) (cos s I + i sin s Y)``."""
    if prior is None:
        prior = Prior(0.0, HALF_PI)
    if prior.lower < -1e-12 or prior.upper > HALF_PI + 1e-12:
        raise ValueError("phase damping prior must live inside [0, pi/2]")

    def v_batch(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return _controlled_rotation(s) @ _EMBED

    return IsometryFamily(2, 2, 2, prior, v_batch, "pdamp")


def _core_unitaries(sx, sy, sz) -> np.ndarray:
    sx, sy, sz = np.broadcast_arrays(
        np.atleast_1d(np.asarray(sx, float)),
        np.atleast_1d(np.asarray(sy, float)),
        np.atleast_1d(np.asarray(sz, float)),
    )
    n = sx.shape[0]
    u = np.zeros((n, 4, 4), dtype=complex)
    em = np.exp(-0.5j * sz)
    ep = np.exp(0.5j * sz)
    cm, sm = np.cos(0.5 * (sx - sy)), np.sin(0.5 * (sx - sy))
    cp, sp = np.cos(0.5 * (sx + sy)), np.sin(0.5 * (sx + sy))
    u[:, 0, 0] = em * cm
    u[:, 0, 3] = -1j * em * sm
    u[:, 1, 1] = ep * cp
    u[:, 1, 2] = -1j * ep * sp
    u[:, 2, 1] = -1j * ep * sp
    u[:, 2, 2] = ep * cp
    u[:, 3, 0] = -1j * em * sm
    u[:, 3, 3] = em * cm
    return u


def core_unitary(sx: float, sy: float, sz: float) -> np.ndarray:
    """``exp[-i/2 (sx XX + sy YY + sz ZZ)]`` from its eight non-zero entries."""
    return _core_unitaries(sx, sy, sz)[0]


_AXES = ("s_x", "s_y", "s_z")


@dataclass(frozen=True)
class CoreUnitaryTarget:
    """Which core angle is unknown, and the known values of the other two.

    ``fixed`` holds the two known angles in ``x, y, z`` order with the
    estimated one left out, e.g. ``estimated="s_y", fixed=(s_x, s_z)``.
    """

    estimated: str
    fixed: tuple

    def __post_init__(self):
        if self.estimated not in _AXES:
            raise ValueError(f"estimated must be one of {_AXES}")
        if len(self.fixed) != 2:
            raise ValueError("fixed must hold exactly two angles")
        for v in self.fixed:
            if not -1e-12 <= v <= HALF_PI + 1e-12:
                raise ValueError(f"angle {v} outside [0, pi/2]")
        a, b = self.fixed
        if a < b - 1e-12:
            raise ValueError(f"fixed angles {self.fixed} violate pi/2 >= s_x >= s_y >= s_z >= 0")

    def interval(self):
        a, b = self.fixed
        if self.estimated == "s_x":
            return (a, HALF_PI)
        if self.estimated == "s_y":
            return (b, a)
        return (0.0, b)

    def is_admissible(self) -> bool:
        lo, hi = self.interval()
        return hi > lo

    def angles(self, s):
        """``(sx, sy, sz)`` with the estimated slot filled by ``s``."""
        a, b = self.fixed
        if self.estimated == "s_x":
            return s, a, b
        if self.estimated == "s_y":
            return a, s, b
        return a, b, s


def core_entangling_family(target: CoreUnitaryTarget, prior: Optional[Prior] = None,
                           quadrature_nodes: int = 64) -> IsometryFamily:
    lo, hi = target.interval()
    if not hi > lo:
        raise ValueError(f"empty admissible interval [{lo}, {hi}] for {target.estimated}")
    if prior is None:
        prior = Prior(lo, hi, quadrature_nodes=quadrature_nodes)
    elif abs(prior.lower - lo) > 1e-12 or abs(prior.upper - hi) > 1e-12:
        raise ValueError(f"prior interval must equal the admissible range [{lo}, {hi}]")

    def v_batch(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return _core_unitaries(*target.angles(s)) @ _EMBED

    label = f"core[{target.estimated}|{target.fixed[0]:.6g},{target.fixed[1]:.6g}]"
    return IsometryFamily(2, 2, 2, prior, v_batch, label)


# ---------------------------------------------------------------- outputs

def joint_outputs(f: IsometryFamily, probe, s) -> np.ndarray:
    """Stack of ``V_s rho_A V_s^H`` for an array of ``s``."""
    rho_a = probe.density() if isinstance(probe, ProbeState) else np.asarray(probe, complex)
    if rho_a.shape != (f.dA, f.dA):
        raise DimensionError("probe dimension does not match the family input")
    v = f.v_batch(np.atleast_1d(np.asarray(s, dtype=float)))
    return v @ rho_a @ np.conj(np.swapaxes(v, 1, 2))


def _check_in_prior(f: IsometryFamily, s: float) -> None:
    if not f.prior.contains(s):
        raise ValueError(f"s={s} outside [{f.prior.lower}, {f.prior.upper}]")


def joint_output(f: IsometryFamily, probe, s: float) -> np.ndarray:
    _check_in_prior(f, s)
    return joint_outputs(f, probe, [s])[0]


def output_B(f: IsometryFamily, probe, s: float) -> np.ndarray:
    return partial_trace(joint_output(f, probe, s), f.dims, "B")


def output_F(f: IsometryFamily, probe, s: float) -> np.ndarray:
    return partial_trace(joint_output(f, probe, s), f.dims, "F")


def check_isometry(f: IsometryFamily, samples: int = 16) -> float:
    """Largest ``||V_s^H V_s - I||_F`` over ``samples`` equispaced ``s``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    s = np.linspace(f.prior.lower, f.prior.upper, samples)
    v = f.v_batch(s)
    g = np.conj(np.swapaxes(v, 1, 2)) @ v - np.eye(f.dA)
    return float(np.max(np.linalg.norm(g, axis=(1, 2))))


# ------------------------------------------------- closed-form matrix entries
# Independent entrywise expressions for U, rho_B, rho_F and rho; used as
# test oracles against the numerical pipeline.

def explicit_u(sx, sy, sz) -> np.ndarray:
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = np.exp(-0.5j * sz) * np.cos((sx - sy) / 2)
    u[0, 3] = -1j * np.exp(-0.5j * sz) * np.sin((sx - sy) / 2)
    u[1, 1] = np.exp(0.5j * sz) * np.cos((sx + sy) / 2)
    u[1, 2] = -1j * np.exp(0.5j * sz) * np.sin((sx + sy) / 2)
    u[2, 1] = -1j * np.exp(0.5j * sz) * np.sin((sx + sy) / 2)
    u[2, 2] = np.exp(0.5j * sz) * np.cos((sx + sy) / 2)
    u[3, 0] = -1j * np.exp(-0.5j * sz) * np.sin((sx - sy) / 2)
    u[3, 3] = np.exp(-0.5j * sz) * np.cos((sx - sy) / 2)
    return u


def _hermitize_upper(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    for i in range(n):
        for j in range(i):
            m[i, j] = np.conj(m[j, i])
    return m


def explicit_rho_b(sx, sy, sz, x, phi) -> np.ndarray:
    c, s = np.cos, np.sin
    r = np.sqrt(x * (1 - x))
    t = sz + phi
    m = np.zeros((2, 2), dtype=complex)
    m[0, 0] = 0.5 + (x - 0.5) * c(sx) * c(sy) + 0.5 * s(sx) * s(sy)
    m[0, 1] = r * (c(sy) * c(t) - 1j * c(sx) * s(t))
    m[1, 1] = 0.5 - (x - 0.5) * c(sx) * c(sy) - 0.5 * s(sx) * s(sy)
    return _hermitize_upper(m)


def explicit_rho_f(sx, sy, sz, x, phi) -> np.ndarray:
    c, s = np.cos, np.sin
    r = np.sqrt(x * (1 - x))
    t = sz + phi
    m = np.zeros((2, 2), dtype=complex)
    m[0, 0] = 0.5 + (x - 0.5) * s(sx) * s(sy) + 0.5 * c(sx) * c(sy)
    m[0, 1] = r * (s(sy) * s(t) + 1j * s(sx) * c(t))
    m[1, 1] = 0.5 - (x - 0.5) * s(sx) * s(sy) - 0.5 * c(sx) * c(sy)
    return _hermitize_upper(m)


def explicit_rho(sx, sy, sz, x, phi) -> np.ndarray:
    c, s = np.cos, np.sin
    r = np.sqrt(x * (1 - x))
    e = np.exp(1j * (sz + phi))
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 0.5 * x * (1 + c(sx) * c(sy) + s(sx) * s(sy))
    m[0, 1] = 0.5j * r * (s(sx) + s(sy)) / e
    m[0, 2] = 0.5 * r * (c(sx) + c(sy)) / e
    m[0, 3] = 0.5j * x * (s(sx) * c(sy) - c(sx) * s(sy))
    m[1, 1] = 0.5 * (1 - x) * (1 - c(sx) * c(sy) + s(sx) * s(sy))
    m[1, 2] = -0.5j * (1 - x) * (c(sx) * s(sy) + s(sx) * c(sy))
    m[1, 3] = -0.5 * r * (c(sx) - c(sy)) * e
    m[2, 2] = 0.5 * (1 - x) * (1 + c(sx) * c(sy) - s(sx) * s(sy))
    m[2, 3] = 0.5j * r * (s(sx) - s(sy)) * e
    m[3, 3] = 0.5 * x * (1 - c(sx) * c(sy) - s(sx) * s(sy))
    return _hermitize_upper(m)
