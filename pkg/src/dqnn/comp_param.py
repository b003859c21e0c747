"""Composite parameterization of U(d) and its analytic derivatives.

A ``d x d`` real matrix ``lam`` (1-based entries ``lam[x, y]`` in the notation
below, stored 0-based) defines the unitary

    U = [ prod_{m=1}^{d-1} prod_{n=m+1}^{d} exp(i lam[n,m] P_n) exp(i lam[m,n] Y_{m,n}) ]
        * [ prod_{l=1}^{d} exp(i lam[l,l] P_l) ]

with products taken left to right, ``P_l = |l-1><l-1|`` and
``Y_{m,n} = -i|m-1><n-1| + i|n-1><m-1|``. Diagonal entries are global phases,
upper-right entries rotation angles and lower-left entries relative phases.

Derivatives
-----------
Each of the ``d**2`` parameters drives exactly one elementary factor
``F_k = exp(i lam_k G_k)``, with ``G_k`` either a projector or a ``Y``. Writing
``U = L_k F_k R_k`` with ``R_k`` the product of all factors to the right of
``F_k`` gives

    dU/dlam_k = i U Ytilde_k,    Ytilde_k = R_k^dagger G_k R_k.

So the conjugating partial product ``U_{x,y}`` is the *suffix* of the factor
sequence after the factor owning ``lam[x, y]``:

* ``x < y`` (rotation): ``U_{x,y} = [prod_{n=y+1}^{d} Lambda_{x,n}]
  [prod_{m=x+1}^{d-1} prod_{n=m+1}^{d} Lambda_{m,n}] prod_{l=1}^{d} exp(i P_l lam[l,l])``.
* ``x > y`` (relative phase): ``U_{x,y} = [prod_{n=x}^{d} Lambda_{y,n}]
  [prod_{m=y+1}^{d-1} prod_{n=m+1}^{d} Lambda_{m,n}] prod_{l=1}^{d} exp(i P_l lam[l,l])``;
  including the first factor ``Lambda_{y,x}`` in full is harmless because its
  phase part commutes with ``P_x``.
* ``x == y``: the suffix is diagonal and commutes with ``P_x``, so
  ``Ytilde = P_x``.

All upper bounds run to ``d`` and the trailing phase product covers every
``l``; this is the convention the finite-difference tests pin down.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "factor_sequence",
    "elementary_factor",
    "build_unitary",
    "build_unitaries",
    "generator",
    "generators",
    "unitary_derivative",
    "random_params",
    "n_params",
]


def n_params(d: int) -> int:
    return d * d


def random_params(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``lam`` uniformly over the canonical ranges.

    Diagonal and lower-left entries are uniform on ``[0, 2 pi]``, upper-right
    entries uniform on ``[0, pi/2]``.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    lam = rng.uniform(0.0, 2 * np.pi, size=(d, d))
    upper = np.triu_indices(d, k=1)
    lam[upper] = rng.uniform(0.0, np.pi / 2, size=len(upper[0]))
    return lam


def factor_sequence(d: int) -> list[tuple[str, int, int]]:
    """Elementary factors in product order as ``(kind, x, y)`` with 1-based
    parameter indices; ``kind`` is ``"relative_phase"``, ``"rotation"`` or
    ``"phase"``."""
    seq = []
    for m in range(1, d):
        for n in range(m + 1, d + 1):
            seq.append(("relative_phase", n, m))
            seq.append(("rotation", m, n))
    seq.extend(("phase", l, l) for l in range(1, d + 1))
    return seq


def _generator_matrix(kind: str, x: int, y: int, d: int) -> np.ndarray:
    g = np.zeros((d, d), dtype=complex)
    if kind == "rotation":
        g[x - 1, y - 1] = -1j
        g[y - 1, x - 1] = 1j
    else:
        g[x - 1, x - 1] = 1.0
    return g


def _check_kind(kind: str, x: int, y: int, d: int) -> None:
    if not (1 <= x <= d and 1 <= y <= d):
        raise ValueError(f"indices ({x}, {y}) out of range 1..{d}")
    if kind == "phase" and x != y:
        raise ValueError("phase factor needs x == y")
    if kind == "rotation" and not x < y:
        raise ValueError("rotation factor needs x < y")
    if kind == "relative_phase" and not x > y:
        raise ValueError("relative phase factor needs x > y")
    if kind not in ("phase", "rotation", "relative_phase"):
        raise ValueError(f"unknown factor kind {kind!r}")


def elementary_factor(value: float, kind: str, x: int, y: int, d: int) -> np.ndarray:
    """Closed form of one factor.

    ``kind="phase"`` with ``x == y == l`` gives ``exp(i value P_l)``;
    ``"relative_phase"`` with ``x = n > y = m`` gives ``exp(i value P_n)``;
    ``"rotation"`` with ``x = m < y = n`` gives ``exp(i value Y_{m,n})``, i.e. the block
    ``[[cos, sin], [-sin, cos]]`` on ``span{|m-1>, |n-1>}``.
    """
    _check_kind(kind, x, y, d)
    f = np.eye(d, dtype=complex)
    if kind == "rotation":
        c, s = np.cos(value), np.sin(value)
        a, b = x - 1, y - 1
        f[a, a] = c
        f[a, b] = s
        f[b, a] = -s
        f[b, b] = c
    else:
        f[x - 1, x - 1] = np.exp(1j * value)
    return f


def _right_apply(u: np.ndarray, kind: str, x: int, y: int, value) -> None:
    """In place ``u <- u @ factor`` over a batch ``u`` of shape (..., d, d)."""
    if kind == "rotation":
        a, b = x - 1, y - 1
        c = np.cos(value)[..., None]
        s = np.sin(value)[..., None]
        ca = u[..., :, a].copy()
        cb = u[..., :, b]
        u[..., :, a] = ca * c - cb * s
        u[..., :, b] = ca * s + cb * c
    else:
        u[..., :, x - 1] *= np.exp(1j * value)[..., None]


def build_unitaries(lam: np.ndarray) -> np.ndarray:
    """Vectorized :func:`build_unitary` over leading axes of ``lam``."""
    lam = np.asarray(lam, dtype=float)
    d = lam.shape[-1]
    batch = lam.shape[:-2]
    u = np.broadcast_to(np.eye(d, dtype=complex), batch + (d, d)).copy()
    for kind, x, y in factor_sequence(d):
        _right_apply(u, kind, x, y, lam[..., x - 1, y - 1])
    return u


def build_unitary(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1] or lam.shape[0] < 2:
        raise ValueError("lam must be a square matrix with d >= 2")
    if not np.all(np.isfinite(lam)):
        raise ValueError("lam entries must be finite")
    return build_unitaries(lam)


def generators(lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unitary and every generator in one backward sweep.

    Returns ``(u, ytilde)`` where ``ytilde[x-1, y-1]`` is the Hermitian
    ``d x d`` generator for ``lam[x, y]``.
    """
    lam = np.asarray(lam, dtype=float)
    d = lam.shape[0]
    ytilde = np.empty((d, d, d, d), dtype=complex)
    suffix = np.eye(d, dtype=complex)
    for kind, x, y in reversed(factor_sequence(d)):
        g = _generator_matrix(kind, x, y, d)
        ytilde[x - 1, y - 1] = suffix.conj().T @ g @ suffix
        suffix = elementary_factor(lam[x - 1, y - 1], kind, x, y, d) @ suffix
    return suffix, ytilde


def generator(lam: np.ndarray, x: int, y: int) -> np.ndarray:
    """Hermitian ``Ytilde`` with ``dU/dlam[x, y] = i U Ytilde`` (1-based x, y)."""
    lam = np.asarray(lam, dtype=float)
    d = lam.shape[0]
    if not (1 <= x <= d and 1 <= y <= d):
        raise ValueError(f"indices ({x}, {y}) out of range 1..{d}")
    if x == y:
        return _generator_matrix("phase", x, x, d)
    return generators(lam)[1][x - 1, y - 1]


def unitary_derivative(lam: np.ndarray, x: int, y: int) -> np.ndarray:
    return 1j * build_unitary(lam) @ generator(lam, x, y)
