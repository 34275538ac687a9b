"""Two-qubit linear algebra: Pauli matrices, states and the Pauli-basis expansion.

Operators are plain ``(4, 4)`` complex numpy arrays. The left tensor factor is
qubit 1 and the computational basis is ordered ``|00>, |01>, |10>, |11>``.

The expansion basis is the 16 operators ``{I, A_ij, L_k, R_k}`` where ``A_ij``
are the nine Peres-Mermin observables (every ``sigma_a (x) sigma_b`` with both
factors non-trivial), ``L_k = sigma_k (x) I`` and ``R_k = I (x) sigma_k``. They
are mutually orthogonal with ``tr(B B') = 4 delta``, so any operator satisfies
``X = (1/4) sum_B tr(B X) B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIM = 4
ALGEBRA_TOL = 1e-12
STATE_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"i": I2, "x": SX, "y": SY, "z": SZ}

IDENTITY = np.eye(DIM, dtype=complex)
MAXIMALLY_MIXED = IDENTITY / DIM

# Pauli labels of the square, row-major. The realization is fixed here once.
PM_LABELS = (
    ("yz", "zy", "xx"),
    ("zx", "xz", "yy"),
    ("xy", "yx", "zz"),
)
LR_LABELS = ("Lx", "Ly", "Lz", "Rx", "Ry", "Rz")


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` acting on qubit 1."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def pauli_product(label: str) -> np.ndarray:
    """``pauli_product("yz")`` is ``sigma_y (x) sigma_z``."""
    return tensor(PAULI[label[0]], PAULI[label[1]])


def dagger(op: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(op, -1, -2))


def _build_basis() -> np.ndarray:
    ops = [IDENTITY]
    ops += [pauli_product(lab) for row in PM_LABELS for lab in row]
    ops += [pauli_product(k + "i") for k in "xyz"]
    ops += [pauli_product("i" + k) for k in "xyz"]
    return np.array(ops)


#: Expansion basis in coefficient-vector order: I, A_11..A_33 (row-major), L_x..L_z, R_x..R_z.
BASIS = _build_basis()
BASIS.setflags(write=False)
L_OPS = BASIS[10:13]
R_OPS = BASIS[13:16]


@dataclass(frozen=True)
class PauliCoefficients:
    """Coefficients of ``rho = (1/4)(c0 I + sum t_ij A_ij + sum l_k L_k + sum r_k R_k)``.

    ``t`` is indexed by grid position, ``t[i-1, j-1]`` belonging to ``A_ij``.
    """

    c0: float
    t: np.ndarray = field(repr=False)
    l: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)

    @classmethod
    def from_vector(cls, v) -> PauliCoefficients:
        v = np.asarray(v, dtype=float)
        if v.shape != (16,):
            raise ValueError(f"expected 16 coefficients, got shape {v.shape}")
        return cls(float(v[0]), v[1:10].reshape(3, 3).copy(), v[10:13].copy(), v[13:16].copy())

    def to_vector(self) -> np.ndarray:
        return np.concatenate(([self.c0], np.ravel(self.t), self.l, self.r))


def pauli_vector(op: np.ndarray) -> np.ndarray:
    """Raw expansion coefficients ``tr(B op)`` in basis order; complex for non-Hermitian input.

    Works on stacks of operators of shape ``(..., 4, 4)``.
    """
    op = np.asarray(op, dtype=complex)
    # tr(B X) = sum_ab B_ab X_ba
    return np.einsum("kab,...ba->...k", BASIS, op)


def pauli_decompose(rho: np.ndarray) -> PauliCoefficients:
    """Real Pauli-basis coefficients of a Hermitian operator."""
    return PauliCoefficients.from_vector(pauli_vector(rho).real)


def pauli_reconstruct(coeffs: PauliCoefficients | np.ndarray) -> np.ndarray:
    v = coeffs.to_vector() if isinstance(coeffs, PauliCoefficients) else np.asarray(coeffs)
    return np.einsum("...k,kab->...ab", v, BASIS) / DIM


def project_LR(rho: np.ndarray) -> np.ndarray:
    """The part of ``rho`` carried by the local terms: ``(1/4)(sum l_k L_k + sum r_k R_k)``."""
    v = pauli_vector(rho).real
    v[..., :10] = 0.0
    return pauli_reconstruct(v)


def random_pure_state(rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state ``|psi><psi|`` from a normalized complex Gaussian vector."""
    g = rng.standard_normal(2 * DIM)
    psi = g[:DIM] + 1j * g[DIM:]
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def ket(*amplitudes) -> np.ndarray:
    """Normalized density matrix of the ket with the given computational-basis amplitudes."""
    psi = np.asarray(amplitudes, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def check_density_matrix(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array, raising ``ValueError`` if it is not a valid state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (DIM, DIM):
        raise ValueError(f"density matrix must be 4x4, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"density matrix is not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix trace is {tr.real:.12g}, expected 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3g}")
    return rho


def is_density_matrix(rho, tol: float = STATE_TOL) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValueError:
        return False
    return True


def hermitize(rho: np.ndarray) -> np.ndarray:
    """Symmetrize and renormalize to unit trace; works on stacks."""
    rho = (rho + dagger(rho)) / 2
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[..., None, None]
