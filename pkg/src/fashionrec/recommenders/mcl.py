"""Markov-chain LDA over part codewords.

An image is one document holding a single structured word
``w = (w_1, ..., w_P)``: the codewords of its parts in schema order. Under
topic z the word has probability

    p(w | z) = p(w_1) * prod_{j>=2} A_z^{(j)}[w_{j-1}, w_j]

with a topic-independent start distribution. Integrating the per-document
topic proportions theta ~ Dir(alpha) over a one-word document leaves
p(z) = alpha_z / sum(alpha), so training reduces to EM for a mixture of
Markov chains with Dirichlet pseudo-count ``eta`` on every row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp


@dataclass
class MclModel:
    alpha: np.ndarray        # (T,) Dirichlet topic prior
    initial: np.ndarray      # (K,) p(w_1)
    transitions: np.ndarray  # (T, P-1, K, K); [z, j-1, a, b] = p(w_j=b | w_{j-1}=a, z)
    eta: float = 0.01
    log_likelihoods: list[float] = field(default_factory=list, repr=False)

    @property
    def T(self) -> int:
        return self.transitions.shape[0]

    @property
    def P(self) -> int:
        return self.transitions.shape[1] + 1

    @property
    def K(self) -> int:
        return self.initial.shape[0]

    @property
    def topic_prior(self) -> np.ndarray:
        return self.alpha / self.alpha.sum()

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "initial": self.initial.tolist(),
            "transitions": self.transitions.tolist(),
            "eta": self.eta,
            "log_likelihoods": list(self.log_likelihoods),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MclModel":
        return cls(
            np.asarray(obj["alpha"], dtype=float),
            np.asarray(obj["initial"], dtype=float),
            np.asarray(obj["transitions"], dtype=float),
            float(obj["eta"]),
            list(obj.get("log_likelihoods", [])),
        )


def _normalize_rows(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=-1, keepdims=True)
    K = counts.shape[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(totals > 0, counts / totals, 1.0 / K)
    return rows


def _chain_log_prob(W: np.ndarray, transitions: np.ndarray) -> np.ndarray:
    """(n, T) log prod_j A_z[w_{j-1}, w_j]; the start term is left out."""
    T, J = transitions.shape[:2]
    out = np.zeros((W.shape[0], T))
    with np.errstate(divide="ignore"):
        for j in range(J):
            out += np.log(transitions[:, j, W[:, j], W[:, j + 1]]).T
    return out


def mcl_train(
    codewords: np.ndarray,
    T: int,
    K: int,
    alpha: float | np.ndarray = 1.0,
    eta: float = 0.01,
    seed: int = 0,
    iterations: int = 100,
    tol: float = 1e-8,
) -> MclModel:
    """EM for the mixture-of-chains reduction.

    E-step: topic responsibilities per image. M-step: transition rows and the
    shared start distribution from (responsibility-weighted) counts plus
    ``eta``. Rows without any mass fall back to uniform, so every row is
    stochastic even with ``eta == 0``.
    """
    W = np.asarray(codewords, dtype=int)
    if T < 1:
        raise ValueError("T must be at least 1")
    if W.ndim != 2 or W.shape[1] < 2:
        raise ValueError("codewords must be (n, P) with P >= 2")
    if W.size and (W.min() < 0 or W.max() >= K):
        raise ValueError(f"codewords must lie in [0, {K})")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    n, P = W.shape
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (T,)).copy()
    if (alpha <= 0).any():
        raise ValueError("alpha must be positive")
    log_prior = np.log(alpha / alpha.sum())

    initial = _normalize_rows(np.bincount(W[:, 0], minlength=K) + eta)
    with np.errstate(divide="ignore"):
        log_start = np.log(initial)[W[:, 0]].sum()

    rng = np.random.default_rng(seed)
    resp = rng.dirichlet(np.ones(T), size=n) if T > 1 else np.ones((n, 1))
    trace: list[float] = []
    transitions = np.empty((T, P - 1, K, K))
    for _ in range(max(iterations, 1)):
        for j in range(P - 1):
            for z in range(T):
                counts = np.zeros((K, K))
                np.add.at(counts, (W[:, j], W[:, j + 1]), resp[:, z])
                transitions[z, j] = _normalize_rows(counts + eta)
        joint = log_prior + _chain_log_prob(W, transitions)
        per_doc = logsumexp(joint, axis=1)
        ll = float(per_doc.sum() + log_start)
        resp = np.exp(joint - per_doc[:, None])
        done = bool(trace) and abs(ll - trace[-1]) <= tol * abs(trace[-1])
        trace.append(ll)
        if T == 1 or done:
            break
    return MclModel(alpha, initial, transitions, float(eta), trace)


def _local_factor(model: MclModel, codewords: np.ndarray, m: int) -> np.ndarray:
    """(T, K) chain factors that involve the missing word w_m = k."""
    T, K, P = model.T, model.K, model.P
    left = np.tile(model.initial, (T, 1)) if m == 0 else model.transitions[:, m - 1, codewords[m - 1], :]
    right = model.transitions[:, m, :, codewords[m + 1]] if m < P - 1 else np.ones((T, K))
    return left * right


def _rest_factor(model: MclModel, codewords: np.ndarray, m: int) -> np.ndarray:
    """(T,) product of chain terms that do not touch position m."""
    out = np.ones(model.T)
    if m != 0:
        out = out * model.initial[codewords[0]]
    for j in range(1, model.P):
        if j != m and j - 1 != m:
            out = out * model.transitions[:, j - 1, codewords[j - 1], codewords[j]]
    return out


def _missing_position(model: MclModel, codewords: np.ndarray) -> int:
    if codewords.shape != (model.P,):
        raise ValueError(f"query has {codewords.shape} codewords, model expects ({model.P},)")
    missing = np.flatnonzero(codewords < 0)
    if len(missing) == model.P:
        raise ValueError("all parts are hidden; nothing to condition on")
    if len(missing) != 1:
        raise ValueError(f"exactly one missing part required, got {len(missing)}")
    return int(missing[0])


def topic_posterior(model: MclModel, codewords: np.ndarray) -> np.ndarray:
    """p(z | visible words), marginalising the missing word."""
    q = np.asarray(codewords, dtype=int)
    m = _missing_position(model, q)
    evidence = _local_factor(model, q, m).sum(axis=1) * _rest_factor(model, q, m)
    post = model.topic_prior * evidence
    total = post.sum()
    if total <= 0:
        return model.topic_prior.copy()
    return post / total


def mcl_infer(model: MclModel, codewords: np.ndarray, sample: bool = False, seed=None) -> tuple[int, np.ndarray]:
    """Complete the missing word under the most probable topic.

    Returns ``(codeword, topic_posterior)``. By default the completion is the
    mode of p(w_m | neighbours, z*); ``sample=True`` draws from it instead.
    """
    q = np.asarray(codewords, dtype=int)
    post = topic_posterior(model, q)
    z = int(np.argmax(post))
    m = _missing_position(model, q)
    cond = _local_factor(model, q, m)[z]
    if not sample:
        return int(np.argmax(cond)), post
    total = cond.sum()
    p = cond / total if total > 0 else np.full(model.K, 1.0 / model.K)
    return int(np.random.default_rng(seed).choice(model.K, p=p)), post
