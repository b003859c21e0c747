"""Dissipative feed-forward quantum neural network.

Every neuron of layer ``k + 1`` owns a perceptron unitary acting on all qubits
of layer ``k`` plus its own qubit, which starts in ``|0>``. A stage applies
the perceptrons of the next layer in ascending order and then traces out the
previous layer. On the stage register the previous layer occupies qubits
``1..w_prev`` and the new layer qubits ``w_prev + 1 .. w_prev + w``.

Gradients are exact. For perceptron ``j`` of a stage with input ``rho_tilde``
and back-propagated effect ``E`` of the next layer,

    dC/dlam_xy = Tr( Ytilde_xy . red_j( i [rho_{j-1}, M_j] ) )

where ``rho_{j-1} = U_{j-1}..U_1 rho_tilde U_1^+..U_{j-1}^+``,
``M_j = U_j^+..U_w^+ (1 (x) E) U_w..U_j`` and ``red_j`` traces the stage
register down to perceptron ``j``'s qubits. The effect of layer ``k`` is
``E_k = (1 (x) <0..0|) M_1 (1 (x) |0..0>)``, starting from ``|Phi><Phi|`` at
the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import comp_param
from .linalg import (
    check_pure_state,
    dag,
    embed_on_qubits,
    n_qubits_of,
    projector,
    reduce_on_qubits,
)
from .qprops import UncertaintyRecord, robertson_arrays

__all__ = [
    "TrainingPair",
    "PairBatch",
    "as_batch",
    "QNN",
    "ProbeRecord",
    "stage_forward",
    "feed_forward",
    "pair_costs",
    "cost",
    "costs_along",
    "effect_operators",
    "effect_operator",
    "gradient",
    "uncertainty_stream",
    "robertson_summary",
    "EntropicRecord",
    "entropic_stream",
]

DEFAULT_TOPOLOGY = (2, 2, 2)
STRATEGIES = ("exact", "paper_literal")


@dataclass(frozen=True)
class TrainingPair:
    """Input state and the desired (pure) output state."""

    psi_in: np.ndarray
    phi_desired: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "psi_in", check_pure_state(self.psi_in))
        object.__setattr__(self, "phi_desired", check_pure_state(self.phi_desired))


class PairBatch(NamedTuple):
    rho_in: np.ndarray  # (N, D_in, D_in)
    targets: np.ndarray  # (N, D_out)


def as_batch(pairs) -> PairBatch:
    """Stack a sequence of :class:`TrainingPair` into arrays (batches pass through)."""
    if isinstance(pairs, PairBatch):
        if len(pairs.targets) == 0:
            raise ValueError("empty set of pairs")
        return pairs
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty set of pairs")
    psi = np.stack([p.psi_in for p in pairs])
    phi = np.stack([p.phi_desired for p in pairs])
    return PairBatch(projector(psi), phi)


@dataclass(frozen=True)
class QNN:
    """Layer widths plus one ``lam`` matrix per non-input neuron, in layer order."""

    topology: tuple[int, ...]
    perceptrons: tuple[np.ndarray, ...]

    def __post_init__(self):
        topo = tuple(int(w) for w in self.topology)
        if len(topo) < 2 or min(topo) < 1:
            raise ValueError(f"invalid topology {self.topology!r}")
        lams = tuple(np.asarray(p, dtype=float) for p in self.perceptrons)
        expected = [2 ** (wp + 1) for wp, w in zip(topo[:-1], topo[1:]) for _ in range(w)]
        if [p.shape for p in lams] != [(d, d) for d in expected]:
            raise ValueError(
                f"perceptron shapes {[p.shape for p in lams]} inconsistent with topology {topo}"
            )
        object.__setattr__(self, "topology", topo)
        object.__setattr__(self, "perceptrons", lams)

    @classmethod
    def random(cls, rng: np.random.Generator, topology: Sequence[int] = DEFAULT_TOPOLOGY) -> "QNN":
        dims = _perceptron_dims(topology)
        return cls(tuple(topology), tuple(comp_param.random_params(d, rng) for d in dims))

    @classmethod
    def identity(cls, topology: Sequence[int] = DEFAULT_TOPOLOGY) -> "QNN":
        return cls(tuple(topology), tuple(np.zeros((d, d)) for d in _perceptron_dims(topology)))

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.perceptrons)

    def stages(self) -> list[tuple[int, int, range]]:
        """``(w_prev, w, perceptron indices)`` for each stage."""
        out, start = [], 0
        for wp, w in zip(self.topology[:-1], self.topology[1:]):
            out.append((wp, w, range(start, start + w)))
            start += w
        return out

    def shifted(self, direction: Sequence[np.ndarray], eps: float) -> "QNN":
        return QNN(self.topology, tuple(p + eps * g for p, g in zip(self.perceptrons, direction)))


def _perceptron_dims(topology: Sequence[int]) -> list[int]:
    return [2 ** (wp + 1) for wp, w in zip(topology[:-1], topology[1:]) for _ in range(w)]


def _positions(w_prev: int, j: int) -> list[int]:
    return list(range(1, w_prev + 1)) + [w_prev + j + 1]


def _embedded(lam: np.ndarray, w_prev: int, w: int, j: int) -> np.ndarray:
    u = comp_param.build_unitaries(lam)
    return embed_on_qubits(u, _positions(w_prev, j), w_prev + w)


def _attach_ancillas(rho: np.ndarray, w: int) -> np.ndarray:
    """``rho (x) |0..0><0..0|`` for ``w`` fresh qubits; batch axes kept."""
    p = rho.shape[-1]
    step = 2**w
    out = np.zeros(rho.shape[:-2] + (p * step, p * step), dtype=complex)
    out[..., ::step, ::step] = rho
    return out


def _lift(e: np.ndarray, w_prev: int) -> np.ndarray:
    """``1_prev (x) e`` with batch axes kept."""
    p = 2**w_prev
    w = e.shape[-1]
    out = np.einsum("ab,...ij->...aibj", np.eye(p), e)
    return out.reshape(e.shape[:-2] + (p * w, p * w))


def _trace_prev(op: np.ndarray, w_prev: int, w: int) -> np.ndarray:
    p, q = 2**w_prev, 2**w
    t = op.reshape(op.shape[:-2] + (p, q, p, q))
    return np.einsum("...aiaj->...ij", t)


def _check_stage(rho_prev: np.ndarray, lams: Sequence[np.ndarray]) -> tuple[int, int]:
    w_prev = n_qubits_of(rho_prev.shape[-1])
    w = len(lams)
    if w < 1:
        raise ValueError("a stage needs at least one perceptron")
    for lam in lams:
        if np.shape(lam)[-1] != 2 ** (w_prev + 1):
            raise ValueError(
                f"perceptron dimension {np.shape(lam)[-1]} does not match a "
                f"{w_prev}-qubit previous layer"
            )
    return w_prev, w


def _stage_unitary(lams: Sequence[np.ndarray], w_prev: int) -> np.ndarray:
    w = len(lams)
    u = None
    for j, lam in enumerate(lams):
        uj = _embedded(lam, w_prev, w, j)
        u = uj if u is None else uj @ u
    return u


def stage_forward(rho_prev: np.ndarray, lams: Sequence[np.ndarray]) -> np.ndarray:
    """One layer transition: attach ``|0>`` ancillas, apply the perceptrons in
    order, trace out the previous layer.

    ``lams`` may carry leading batch axes (a batch of networks); they align
    with the leading batch axes of ``rho_prev``.
    """
    rho_prev = np.asarray(rho_prev, dtype=complex)
    w_prev, w = _check_stage(rho_prev, lams)
    u = _stage_unitary(lams, w_prev)
    rt = _attach_ancillas(rho_prev, w)
    nb = u.ndim - 2
    extra = rho_prev.ndim - 2 - nb
    if nb and extra > 0:
        u = u.reshape(u.shape[:-2] + (1,) * extra + u.shape[-2:])
    return _trace_prev(u @ rt @ dag(u), w_prev, w)


def feed_forward(net: QNN, rho_in: np.ndarray) -> np.ndarray:
    """Output density matrix (batch axes of ``rho_in`` are kept)."""
    rho = np.asarray(rho_in, dtype=complex)
    if rho.shape[-1] != 2 ** net.topology[0]:
        raise ValueError(
            f"input of dimension {rho.shape[-1]} does not fit a {net.topology[0]}-qubit input layer"
        )
    for _, _, idx in net.stages():
        rho = stage_forward(rho, [net.perceptrons[i] for i in idx])
    return rho


def _check_targets(net: QNN, batch: PairBatch) -> None:
    if batch.targets.shape[-1] != 2 ** net.topology[-1]:
        raise ValueError("desired states do not match the output layer")


def pair_costs(net: QNN, pairs) -> np.ndarray:
    """``<Phi|rho_out|Phi>`` for every pair."""
    b = as_batch(pairs)
    _check_targets(net, b)
    rho = feed_forward(net, b.rho_in)
    phi = b.targets
    return np.einsum("ni,nij,nj->n", np.conj(phi), rho, phi).real


def cost(net: QNN, pairs) -> float:
    """Mean fidelity between network outputs and the desired pure states."""
    return float(np.mean(pair_costs(net, pairs)))


def costs_along(net: QNN, direction: Sequence[np.ndarray], eps: np.ndarray, pairs) -> np.ndarray:
    """``cost(net.shifted(direction, e))`` for every ``e`` in ``eps`` in one batch."""
    b = as_batch(pairs)
    _check_targets(net, b)
    eps = np.asarray(eps, dtype=float)
    rho = b.rho_in[None]
    for _, _, idx in net.stages():
        lams = [net.perceptrons[i] + eps[:, None, None] * direction[i] for i in idx]
        rho = stage_forward(rho, lams)
    phi = b.targets
    return np.einsum("ni,gnij,nj->gn", np.conj(phi), rho, phi).real.mean(axis=1)


class _Stage(NamedTuple):
    w_prev: int
    w: int
    indices: range
    rho_tilde: np.ndarray  # (N, D, D)
    unitaries: list  # embedded perceptron unitaries, (D, D) each
    generators: list  # (d, d, d, d) per perceptron


def _trace_forward(net: QNN, rho_in: np.ndarray, with_generators: bool = True) -> list[_Stage]:
    stages = []
    rho = rho_in
    for wp, w, idx in net.stages():
        us, ys = [], []
        for j, i in enumerate(idx):
            if with_generators:
                u, y = comp_param.generators(net.perceptrons[i])
                ys.append(y)
            else:
                u = comp_param.build_unitary(net.perceptrons[i])
            us.append(embed_on_qubits(u, _positions(wp, j), wp + w))
        rt = _attach_ancillas(rho, w)
        stages.append(_Stage(wp, w, idx, rt, us, ys))
        u_stage = us[0]
        for u in us[1:]:
            u_stage = u @ u_stage
        rho = _trace_prev(u_stage @ rt @ dag(u_stage), wp, w)
    return stages


def _backward(net: QNN, batch: PairBatch, strategy: str = "exact"):
    """Yield, stage by stage from the output backwards, the tuple
    ``(stage, j, rho_before_j, M_j)`` and finally collect layer effects."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown gradient strategy {strategy!r}")
    _check_targets(net, batch)
    stages = _trace_forward(net, batch.rho_in)
    target_proj = projector(batch.targets)
    e = target_proj
    effects = {len(net.topology): e}
    items = []
    for s in reversed(range(len(stages))):
        st = stages[s]
        rhos = [st.rho_tilde]
        for u in st.unitaries[:-1]:
            rhos.append(u @ rhos[-1] @ dag(u))
        m = _lift(e, st.w_prev)
        for j in reversed(range(st.w)):
            u = st.unitaries[j]
            m = dag(u) @ m @ u
            items.append((st, j, rhos[j], m))
        layer = s + 1
        if strategy == "exact":
            e = m[..., :: 2**st.w, :: 2**st.w]
        else:
            if net.topology[s] != net.topology[-1]:
                raise ValueError("paper_literal strategy needs equal layer widths")
            e = target_proj
        effects[layer] = e
    return items, effects


def effect_operators(net: QNN, pairs, strategy: str = "exact") -> dict[int, np.ndarray]:
    """Back-propagated effects ``E_k`` (batched over pairs) keyed by 1-based layer.

    With the exact strategy ``Tr(E_k rho_k)`` equals the pair's cost on every layer.
    """
    return _backward(net, as_batch(pairs), strategy)[1]


def effect_operator(net: QNN, phi_desired: np.ndarray, from_layer: int) -> np.ndarray:
    """Effect of a single desired state on layer ``from_layer`` (2..L)."""
    n_layers = len(net.topology)
    if not 2 <= from_layer <= n_layers:
        raise ValueError(f"from_layer must lie in 2..{n_layers}")
    phi = check_pure_state(phi_desired)
    # the effect does not depend on the input state; any valid input will do
    dummy = np.zeros((1, 2 ** net.topology[0], 2 ** net.topology[0]), dtype=complex)
    dummy[0, 0, 0] = 1.0
    effects = effect_operators(net, PairBatch(dummy, phi[None, :]))
    return effects[from_layer][0]


def gradient(net: QNN, pairs, strategy: str = "exact") -> list[np.ndarray]:
    """``dC/dlam`` for every perceptron, same shapes as ``net.perceptrons``.

    ``strategy="paper_literal"`` replaces every back-propagated effect by the
    desired-state projector, i.e. applies the output-stage formula to each
    stage as if its output were the network output. Only the exact strategy is
    the true gradient of the cost.
    """
    batch = as_batch(pairs)
    items, _ = _backward(net, batch, strategy)
    grads: list[np.ndarray | None] = [None] * len(net.perceptrons)
    for st, j, rho, m in items:
        g_full = (1j * (rho @ m - m @ rho)).mean(axis=0)
        g = reduce_on_qubits(g_full, _positions(st.w_prev, j), st.w_prev + st.w)
        y = st.generators[j]
        grads[st.indices[j]] = np.einsum("xyab,ba->xy", y, g).real
    return grads


@dataclass(frozen=True)
class ProbeRecord:
    """Robertson record for generator ``(x, y)`` of one perceptron, evaluated
    on eigenvector ``component`` of the back-propagated effect."""

    perceptron: int
    x: int
    y: int
    component: int
    record: UncertaintyRecord


def _probe_index(d: int, probes) -> list[tuple[int, int]]:
    if probes is None:
        return [(x, y) for x in range(1, d + 1) for y in range(1, d + 1)]
    return [(int(x), int(y)) for x, y in probes]


def _uncertainty_arrays(net: QNN, batch: PairBatch, probes=None, weight_tol: float = 1e-12):
    """Yield ``(pair, perceptron, probes, weights, delta_a, delta_b, bound, (A, B, states))``.

    ``A`` is the embedded generator, ``B`` the perceptron's input state
    ``rho_{j-1}`` and the states are the eigenvectors of ``M_j`` weighted by
    their eigenvalues; summing ``-2 * weight * Im<A psi|B psi>`` over them
    gives the pair's gradient entry.
    """
    items, _ = _backward(net, batch)
    for st, j, rho, m in sorted(items, key=lambda it: (it[0].indices[it[1]])):
        idx = st.indices[j]
        n_stage = st.w_prev + st.w
        d = net.perceptrons[idx].shape[0]
        plist = _probe_index(d, probes)
        y = st.generators[j]
        a_small = np.stack([y[x - 1, yy - 1] for x, yy in plist])
        a = embed_on_qubits(a_small, _positions(st.w_prev, j), n_stage)
        for n in range(rho.shape[0]):
            mu, vecs = np.linalg.eigh(0.5 * (m[n] + dag(m[n])))
            keep = mu > weight_tol
            mu, vecs = mu[keep], vecs[:, keep]
            b = 0.5 * (rho[n] + dag(rho[n]))
            da, db, lb = robertson_arrays(vecs, a, b)
            yield n, idx, plist, mu, da, db, lb, (a, b, vecs)


def uncertainty_stream(net: QNN, pair: TrainingPair, probes=None) -> list[ProbeRecord]:
    """Robertson records for every perceptron and probe ``(x, y)`` on one pair.

    Records are ordered by perceptron, probe and component.
    """
    out = []
    batch = as_batch([pair])
    for _, idx, plist, mu, da, db, lb, _ in _uncertainty_arrays(net, batch, probes):
        for p, (x, y) in enumerate(plist):
            for k in range(len(mu)):
                prod = float(da[p, k] * db[k])
                rec = UncertaintyRecord(
                    float(da[p, k]), float(db[k]), float(lb[p, k]), prod, prod - float(lb[p, k]), float(mu[k])
                )
                out.append(ProbeRecord(idx, x, y, k, rec))
    return out


def robertson_summary(net: QNN, pairs, probes=None) -> tuple[float, float, float]:
    """``(min bound, weighted mean bound, min slack)`` over every record of every pair."""
    lo, num, den, slack = np.inf, 0.0, 0.0, np.inf
    for _, _, _, mu, da, db, lb, _ in _uncertainty_arrays(net, as_batch(pairs), probes):
        lo = min(lo, float(lb.min()))
        num += float((lb * mu).sum())
        den += float(mu.sum()) * lb.shape[0]
        slack = min(slack, float((da * db[None, :] - lb).min()))
    return lo, num / den, slack


@dataclass(frozen=True)
class EntropicRecord:
    """``S(A) + S(B) >= bound`` for the eigenbases of a probe generator and of
    the perceptron's input state, measured on one effect eigenvector."""

    perceptron: int
    x: int
    y: int
    component: int
    weight: float
    entropy_a: float
    entropy_b: float
    bound: float

    @property
    def slack(self) -> float:
        return self.entropy_a + self.entropy_b - self.bound


def _entropies(bases: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    d = vecs.shape[0]
    p = np.abs(dag(bases) @ vecs) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return np.clip(-terms.sum(axis=-2) / np.log(d), 0.0, None)


def entropic_stream(net: QNN, pair: TrainingPair, probes=None) -> list[EntropicRecord]:
    """Entropic counterpart of :func:`uncertainty_stream` (log base = stage dimension)."""
    out = []
    for _, idx, plist, mu, _, _, _, (a, b, vecs) in _uncertainty_arrays(net, as_batch([pair]), probes):
        basis_a = np.linalg.eigh(a)[1]
        basis_b = np.linalg.eigh(b)[1]
        d = b.shape[-1]
        s_a = _entropies(basis_a, vecs)
        s_b = _entropies(basis_b, vecs)
        overlap = np.abs(dag(basis_a) @ basis_b) ** 2
        bound = np.clip(-np.log(np.minimum(overlap.max(axis=(-1, -2)), 1.0)) / np.log(d), 0.0, None)
        for p, (x, y) in enumerate(plist):
            for k in range(len(mu)):
                out.append(
                    EntropicRecord(idx, x, y, k, float(mu[k]), float(s_a[p, k]), float(s_b[k]), float(bound[p]))
                )
    return out
