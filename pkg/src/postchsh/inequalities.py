"""CHSH and CH-form combinations, the local-realistic bound and Cirel'son's bound."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .linalg import eigvalsh, spectral_norm_hermitian
from .statevector import PAULI, StateVector, expectation

RANGE_TOL = 1e-12

CHSH_LHV = 2.0
CHSH_CIRELSON = 2.0 * math.sqrt(2.0)
CHSH_MAX = 4.0


def bound_transform(l: float) -> float:
    """Map a CHSH-form bound onto the CH form: (l - 2) / 4."""
    return (l - 2.0) / 4.0


@dataclass(frozen=True)
class CHSHParams:
    m: int = 1
    n: int = 1

    def __post_init__(self):
        if self.m not in (-1, 1) or self.n not in (-1, 1):
            raise ValueError(f"m and n must be -1 or +1, got m={self.m!r}, n={self.n!r}")


ALL_SIGNS = tuple(CHSHParams(m, n) for m in (1, -1) for n in (1, -1))


@dataclass(frozen=True)
class InequalityReport:
    form: Literal["CHSH", "CH"]
    terms: dict[str, float]
    combination_value: float
    lhv_bound: float
    cirelson_bound: float
    algebraic_max: float
    # CH only: the two-sided local-realistic band
    lhv_band: tuple[float, float] | None = None
    standard_errors: dict[str, float] = field(default_factory=dict)

    @property
    def violates_lhv(self) -> bool:
        return self.combination_value > self.lhv_bound + RANGE_TOL

    @property
    def exceeds_cirelson(self) -> bool:
        return self.combination_value > self.cirelson_bound + RANGE_TOL

    def bounds(self) -> dict[str, float]:
        return {"lhv": self.lhv_bound, "cirelson": self.cirelson_bound, "max": self.algebraic_max}


def _check_range(name, x, lo, hi):
    if not (lo - RANGE_TOL <= x <= hi + RANGE_TOL):
        raise ValueError(f"{name}={x!r} outside [{lo}, {hi}]")


def chsh_value(c_AB: float, c_Ab: float, c_aB: float, c_ab: float,
               params: CHSHParams = CHSHParams()) -> float:
    """|C(A,B) - m C(A,b) - n C(a,B) - m n C(a,b)|."""
    for name, c in zip(("c_AB", "c_Ab", "c_aB", "c_ab"), (c_AB, c_Ab, c_aB, c_ab)):
        _check_range(name, c, -1.0, 1.0)
    m, n = params.m, params.n
    return abs(c_AB - m * c_Ab - n * c_aB - m * n * c_ab)


def ch_value(p_zz: float, p_zx: float, p_xz: float, p_xx: float) -> float:
    """Signed CH combination; local realism keeps it inside [-1, 0]."""
    for name, p in zip(("p_zz", "p_zx", "p_xz", "p_xx"), (p_zz, p_zx, p_xz, p_xx)):
        _check_range(name, p, 0.0, 1.0)
    return p_zz - p_zx - p_xz - p_xx


def chsh_report(c_zz, c_zx, c_xz, c_xx, params: CHSHParams = CHSHParams(),
                standard_errors=None) -> InequalityReport:
    terms = {"C_zz": c_zz, "C_zx": c_zx, "C_xz": c_xz, "C_xx": c_xx}
    return InequalityReport(
        "CHSH", terms, chsh_value(c_zz, c_zx, c_xz, c_xx, params),
        CHSH_LHV, CHSH_CIRELSON, CHSH_MAX,
        standard_errors=dict(standard_errors or {}),
    )


def ch_report(p_zz, p_zx, p_xz, p_xx, standard_errors=None) -> InequalityReport:
    terms = {"P_zz": p_zz, "P_zx": p_zx, "P_xz": p_xz, "P_xx": p_xx}
    return InequalityReport(
        "CH", terms, ch_value(p_zz, p_zx, p_xz, p_xx),
        bound_transform(CHSH_LHV), bound_transform(CHSH_CIRELSON), bound_transform(CHSH_MAX),
        lhv_band=(-1.0, 0.0),
        standard_errors=dict(standard_errors or {}),
    )


# local hidden variables

@dataclass(frozen=True)
class LHVAssignment:
    v_A: int
    v_a: int
    v_B: int
    v_b: int

    def __post_init__(self):
        if any(v not in (-1, 1) for v in (self.v_A, self.v_a, self.v_B, self.v_b)):
            raise ValueError("predefined values must be -1 or +1")


def lhv_combination(v: LHVAssignment, params: CHSHParams = CHSHParams()) -> int:
    """v_B (v_A - n v_a) - m v_b (v_A + n v_a); always -2 or +2."""
    m, n = params.m, params.n
    return v.v_B * (v.v_A - n * v.v_a) - m * v.v_b * (v.v_A + n * v.v_a)


def all_lhv_assignments() -> list[LHVAssignment]:
    return [LHVAssignment(*vals) for vals in itertools.product((1, -1), repeat=4)]


def lhv_max(params: CHSHParams = CHSHParams()) -> tuple[int, list[LHVAssignment]]:
    """Largest |combination| over all 16 deterministic strategies.

    Also returns the assignments attaining the signed maximum (+2); the
    other half of the strategies attain -2.
    """
    values = {v: lhv_combination(v, params) for v in all_lhv_assignments()}
    best = max(abs(x) for x in values.values())
    top = max(values.values())
    return best, [v for v, x in values.items() if x == top]


# Cirel'son's bound

@dataclass(frozen=True)
class DichotomicObservable:
    """Spin component along a unit Bloch direction; squares to the identity."""

    bloch: tuple[float, float, float]

    def __post_init__(self):
        vec = tuple(float(x) for x in self.bloch)
        if len(vec) != 3:
            raise ValueError("Bloch vector must have three components")
        norm = math.sqrt(sum(x * x for x in vec))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"Bloch vector must be unit norm, got |b|={norm!r}")
        object.__setattr__(self, "bloch", vec)

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "DichotomicObservable":
        """Polar angle from +z, azimuth from +x toward +y."""
        return cls((math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "DichotomicObservable":
        v = rng.normal(size=3)
        v = v / np.linalg.norm(v)
        # renormalize through math to stay inside the 1e-12 unit-norm check
        norm = math.sqrt(sum(float(x) ** 2 for x in v))
        return cls(tuple(float(x) / norm for x in v))

    def matrix(self) -> np.ndarray:
        x, y, z = self.bloch
        return x * PAULI["X"] + y * PAULI["Y"] + z * PAULI["Z"]


def cirelson_operator(A, a, B, b, params: CHSHParams = CHSHParams()) -> np.ndarray:
    """A B - m A b - n a B - m n a b on the two-qubit space (4x4)."""
    m, n = params.m, params.n
    A, a, B, b = (o.matrix() for o in (A, a, B, b))
    return np.kron(A, B) - m * np.kron(A, b) - n * np.kron(a, B) - m * n * np.kron(a, b)


def cirelson_square_identity(A, a, B, b, params: CHSHParams = CHSHParams()) -> np.ndarray:
    """4 I - m n [A, a] (x) [B, b], which equals the square of the CHSH operator."""
    Am, am, Bm, bm = (o.matrix() for o in (A, a, B, b))
    comm_a = Am @ am - am @ Am
    comm_b = Bm @ bm - bm @ Bm
    return 4.0 * np.eye(4) - params.m * params.n * np.kron(comm_a, comm_b)


def cirelson_norm_via_square(A, a, B, b, params: CHSHParams = CHSHParams()) -> float:
    top = eigvalsh(cirelson_square_identity(A, a, B, b, params))[-1]
    return math.sqrt(max(float(top), 0.0))


def cirelson_norm(A, a, B, b, params: CHSHParams = CHSHParams(), cross_check: bool = True) -> float:
    """Spectral norm of the CHSH operator for four dichotomic observables.

    With ``cross_check`` the norm is recomputed from the squared-operator
    identity and an ArithmeticError is raised if the two disagree by more
    than 1e-9.
    """
    norm = spectral_norm_hermitian(cirelson_operator(A, a, B, b, params))
    if cross_check:
        other = cirelson_norm_via_square(A, a, B, b, params)
        if abs(norm - other) > 1e-9:
            raise ArithmeticError(f"norm paths disagree: {norm!r} vs {other!r}")
    return norm


def cirelson_norms(settings, params: CHSHParams = CHSHParams(), cross_check: bool = True) -> np.ndarray:
    """Vectorized ``cirelson_norm`` over a sequence of (A, a, B, b) quadruples."""
    ops = np.stack([cirelson_operator(*obs, params) for obs in settings])
    norms = spectral_norm_hermitian(ops)
    if cross_check:
        squares = np.stack([cirelson_square_identity(*obs, params) for obs in settings])
        other = np.sqrt(np.maximum(eigvalsh(squares)[:, -1], 0.0))
        worst = float(np.max(np.abs(norms - other)))
        if worst > 1e-9:
            raise ArithmeticError(f"norm paths disagree by {worst!r}")
    return np.asarray(norms)


def canonical_settings() -> tuple[DichotomicObservable, ...]:
    """A=z, a=x, B=(z+x)/sqrt2, b=(z-x)/sqrt2, which reach 2 sqrt 2 with m=n=1."""
    return (
        DichotomicObservable.from_angles(0.0),
        DichotomicObservable.from_angles(math.pi / 2),
        DichotomicObservable.from_angles(math.pi / 4),
        DichotomicObservable.from_angles(-math.pi / 4),
    )


def quantum_correlation(state: StateVector, A: DichotomicObservable, B: DichotomicObservable) -> float:
    """<psi| A (x) B |psi> for a two-qubit state, expanded over Pauli pairs."""
    if state.num_qubits != 2:
        raise ValueError("quantum_correlation needs a two-qubit state")
    total = 0.0
    for (pa, ca), (pb, cb) in itertools.product(zip("XYZ", A.bloch), zip("XYZ", B.bloch)):
        if ca and cb:
            total += ca * cb * expectation(state, pa + pb)
    return total
