"""Spin Hilbert spaces, spin operators, projectors and the magnetic Hamiltonian.

A radical-ion pair is two unpaired electron spins (1/2 each) plus any number
of nuclear spins, each hyperfine-coupled to exactly one electron.  The total
Hamiltonian is

    H = omega * (s_1z + s_2z) + sum_j  s_e(j) . A_j . I_j

with omega = gamma_e * B (nuclear Zeeman neglected).  All operators are dense
complex matrices on the tensor-product space ordered as

    electron1 (x) electron2 (x) nucleus_1 (x) ... (x) nucleus_n

in the standard angular-momentum z-basis, highest m first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from math import prod

import numpy as np
from numpy.typing import NDArray

from .constants import DIM_CAP_DEFAULT, GAMMA_E_RAD_PER_US_PER_MT
from .errors import DimensionError, ModelError

__all__ = [
    "HyperfineCoupling",
    "NucleusSpec",
    "SpinSystem",
    "OperatorSet",
    "spin_matrices",
    "build_operators",
]


def spin_matrices(spin: float) -> tuple[NDArray, NDArray, NDArray]:
    """Return (sx, sy, sz) for a single spin, basis ordered m = s, s-1, ..., -s."""
    two_s = round(2 * spin)
    if two_s <= 0 or abs(2 * spin - two_s) > 1e-12:
        raise ModelError(f"spin must be a positive multiple of 1/2, got {spin}")
    n = two_s + 1
    m = spin - np.arange(n)
    sz = np.diag(m).astype(complex)
    # raising operator: <m+1| s+ |m> = sqrt(s(s+1) - m(m+1))
    sp = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        sp[i - 1, i] = np.sqrt(spin * (spin + 1) - m[i] * (m[i] + 1))
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    return sx, sy, sz


@dataclass(frozen=True)
class HyperfineCoupling:
    """Hyperfine tensor in angular-frequency units (rad/us), 3x3 real."""

    tensor: NDArray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=float)
        if t.shape != (3, 3):
            raise ModelError(f"hyperfine tensor must be 3x3, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ModelError("hyperfine tensor entries must be finite")
        object.__setattr__(self, "tensor", t)

    @classmethod
    def isotropic(cls, a_rad_per_us: float) -> "HyperfineCoupling":
        """Scalar coupling A (rad/us) -> A * identity."""
        return cls(np.eye(3) * float(a_rad_per_us))

    @classmethod
    def isotropic_mT(cls, a_mT: float) -> "HyperfineCoupling":
        """Scalar coupling quoted in millitesla, converted via gamma_e."""
        return cls.isotropic(float(a_mT) * GAMMA_E_RAD_PER_US_PER_MT)


@dataclass(frozen=True)
class NucleusSpec:
    """One nuclear spin: its quantum number, host electron (1 or 2), coupling."""

    spin: float
    electron: int
    hyperfine: HyperfineCoupling

    def __post_init__(self):
        two_s = round(2 * self.spin)
        if two_s <= 0 or abs(2 * self.spin - two_s) > 1e-12:
            raise ModelError(f"nuclear spin must be a positive half-integer, got {self.spin}")
        if self.electron not in (1, 2):
            raise ModelError(f"electron index must be 1 or 2, got {self.electron}")

    @property
    def multiplicity(self) -> int:
        return round(2 * self.spin) + 1


@dataclass(frozen=True)
class SpinSystem:
    """Two electrons + n nuclei in an external field B z-hat (millitesla)."""

    nuclei: tuple[NucleusSpec, ...] = ()
    field_mT: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if not np.isfinite(self.field_mT) or self.field_mT < 0:
            raise ModelError(f"field_mT must be finite and >= 0, got {self.field_mT}")

    def dimension(self) -> int:
        """d = 4 * prod_j (2 I_j + 1)."""
        return 4 * prod(n.multiplicity for n in self.nuclei)

    def with_field(self, field_mT: float) -> "SpinSystem":
        return SpinSystem(self.nuclei, field_mT)

    def with_isotropic_coupling(self, index: int, a_rad_per_us: float) -> "SpinSystem":
        """Copy with nucleus ``index`` given an isotropic coupling (rad/us)."""
        nuclei = list(self.nuclei)
        old = nuclei[index]
        nuclei[index] = NucleusSpec(old.spin, old.electron, HyperfineCoupling.isotropic(a_rad_per_us))
        return SpinSystem(tuple(nuclei), self.field_mT)


@dataclass(frozen=True)
class OperatorSet:
    """Dense operators on the full product space; immutable after construction."""

    dim: int
    h: NDArray
    q_singlet: NDArray
    q_triplet: NDArray
    s1z_plus_s2z: NDArray
    singlet_basis: NDArray = field(repr=False, default=None)  # d x (d/4) isometry, Q_S = U U+

    def spectral_radius(self) -> float:
        """Largest |eigenvalue| of the Hamiltonian (rad/us)."""
        return float(np.max(np.abs(np.linalg.eigvalsh(self.h)))) if self.dim else 0.0


def _embed(op: NDArray, slot: int, dims: list[int]) -> NDArray:
    """Place ``op`` at tensor slot ``slot``, identity elsewhere."""
    mats = [np.eye(d, dtype=complex) for d in dims]
    mats[slot] = op
    return reduce(np.kron, mats)


def build_operators(system: SpinSystem, dim_cap: int = DIM_CAP_DEFAULT) -> OperatorSet:
    """Construct H, Q_S, Q_T and s1z+s2z for a spin system.

    Raises DimensionError when the Hilbert-space dimension exceeds ``dim_cap``.
    """
    d = system.dimension()
    if d > dim_cap:
        raise DimensionError(f"dimension {d} exceeds cap {dim_cap}")

    dims = [2, 2] + [n.multiplicity for n in system.nuclei]
    half = spin_matrices(0.5)

    s1 = [_embed(c, 0, dims) for c in half]
    s2 = [_embed(c, 1, dims) for c in half]

    omega = GAMMA_E_RAD_PER_US_PER_MT * system.field_mT
    s1z_plus_s2z = s1[2] + s2[2]
    h = omega * s1z_plus_s2z

    for j, nuc in enumerate(system.nuclei):
        i_ops = [_embed(c, 2 + j, dims) for c in spin_matrices(nuc.spin)]
        s_e = s1 if nuc.electron == 1 else s2
        a = nuc.hyperfine.tensor
        for p in range(3):
            for q in range(3):
                if a[p, q] != 0.0:
                    h = h + a[p, q] * (s_e[p] @ i_ops[q])

    # Q_S = (1/4) 1 - s1.s2, extended by identity on the nuclei.
    s1_dot_s2 = s1[0] @ s2[0] + s1[1] @ s2[1] + s1[2] @ s2[2]
    q_s = 0.25 * np.eye(d, dtype=complex) - s1_dot_s2
    q_t = np.eye(d, dtype=complex) - q_s

    # Rank-d/4 factorization Q_S = U U+ (singlet (x) nuclear basis), used by
    # the propagation kernels to cut the cost of Q_S rho Q_S.
    singlet = np.zeros(4, dtype=complex)
    singlet[1] = 1 / np.sqrt(2)   # |up down>
    singlet[2] = -1 / np.sqrt(2)  # |down up>
    u = np.kron(singlet.reshape(4, 1), np.eye(d // 4, dtype=complex))

    for m in (h, q_s, q_t, s1z_plus_s2z):
        m.setflags(write=False)
    u.setflags(write=False)

    return OperatorSet(dim=d, h=h, q_singlet=q_s, q_triplet=q_t,
                       s1z_plus_s2z=s1z_plus_s2z, singlet_basis=u)
