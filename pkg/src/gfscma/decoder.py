"""Message-passing decoding of the superposed data symbols.

Plain MPA runs sum-product over the resource/UE factor graph induced by the
survivors: resource nodes marginalize a Gaussian likelihood over the product
set of incident UEs' codewords, UE nodes multiply incoming resource messages,
flooding schedule, probability domain with per-message renormalization.

JMPA augments every survivor's codebook with the all-zero codeword, uses the
zero-codeword posterior (averaged over the frame) to rule on activity, then
reruns plain MPA on the UEs it kept.

Complexity accounting follows ops = n_iter * sum_i M^d(i) with d(i) counted
over survivors only and empty resources contributing nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebooks import Codebook, FactorGraph, indices_to_bits

__all__ = ["Survivor", "DecoderInput", "DecodeResult", "mpa_decode", "jmpa_decode",
           "complexity_count"]

# symbol-chunking bound on likelihood tensor entries, keeps worst-case memory flat
_MAX_TENSOR = 1 << 22


@dataclass(frozen=True)
class Survivor:
    """One UE the detector kept: identity, codebook, data-location gains."""

    label: int
    codebook: Codebook
    gains: np.ndarray  # (T,) complex


@dataclass(frozen=True)
class DecoderInput:
    y_data: np.ndarray                 # (n_sym, T)
    survivors: tuple[Survivor, ...]
    sigma2: float
    n_iter: int = 6
    mode: str = "mpa"                  # mpa | jmpa
    jmpa_theta: float = 0.5

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if self.mode not in ("mpa", "jmpa"):
            raise ValueError(f"mode must be mpa or jmpa, got {self.mode!r}")
        for s in self.survivors:
            if s.gains.shape != (self.y_data.shape[1],):
                raise ValueError(f"survivor {s.label}: gains shape {s.gains.shape} "
                                 f"does not match T={self.y_data.shape[1]}")


@dataclass
class DecodeResult:
    """Per-UE outputs keyed by survivor label."""

    symbols: dict[int, np.ndarray] = field(default_factory=dict)
    bits: dict[int, np.ndarray] = field(default_factory=dict)
    posteriors: dict[int, np.ndarray] = field(default_factory=dict)
    jmpa_active: dict[int, bool] | None = None
    zero_posterior: dict[int, float] | None = None
    complexity_ops: int = 0


def complexity_count(graph: FactorGraph, survivor_groups, M_p: int, n_iter: int) -> int:
    """n_iter * sum over occupied resources of M_p^d(i), d(i) over survivors only."""
    degrees = np.zeros(graph.T, dtype=int)
    for g in survivor_groups:
        degrees += graph.occupancy[:, g - 1]
    return int(n_iter) * sum(int(M_p) ** int(d) for d in degrees if d > 0)


def _likelihoods(y, eff, res_users, sigma2, chunk):
    """Per-resource likelihood tables for one symbol chunk.

    eff: (U, Mh, T) gain-weighted codewords. Returns list over resources of
    flattened (n_chunk, Mh^d) arrays (row-major over the incident users'
    hypothesis axes), normalized by the per-symbol max; degenerates to a hard
    indicator at sigma2 = 0.
    """
    out = []
    Mh = eff.shape[1]
    for i, inc in enumerate(res_users):
        d = len(inc)
        if d == 0:
            out.append(None)
            continue
        combo = np.zeros((Mh,) * d, dtype=complex)
        for ax, u in enumerate(inc):
            combo = combo + eff[u, :, i].reshape((1,) * ax + (Mh,) + (1,) * (d - ax - 1))
        d2 = np.abs(y[chunk, i, None] - combo.reshape(1, -1)) ** 2
        mn = d2.min(axis=1, keepdims=True)
        if sigma2 > 0:
            out.append(np.exp(-(d2 - mn) / sigma2))
        else:
            out.append((d2 <= mn + 1e-12 * (1.0 + mn)).astype(float))
    return out


def _resource_messages(L_flat, msgs, Mh):
    """Marginalize the likelihood table against all-but-one incident message.

    L_flat: (n, Mh^d) row-major over d hypothesis axes; msgs: d arrays (n, Mh).
    Returns one (n, Mh) unnormalized message per incident user. Uses running
    suffix products so total work is O(Mh^d) rather than O(d * Mh^d).
    """
    d = len(msgs)
    n = L_flat.shape[0]
    suffix = [None] * (d + 1)
    suffix[d] = L_flat
    for k in range(d - 1, -1, -1):
        X = suffix[k + 1].reshape(n, Mh**k, Mh)
        suffix[k] = np.matmul(X, msgs[k][:, :, None])[:, :, 0]
    outs = []
    for k in range(d):
        X = suffix[k + 1]  # axes 0..k uncontracted
        for j in range(k):
            X = np.matmul(msgs[j][:, None, :], X.reshape(n, Mh, -1))[:, 0, :]
        outs.append(X.reshape(n, Mh))
    return outs


def _sum_product(y, eff, occupied, sigma2, n_iter):
    """Flooding sum-product. Returns (posteriors (n_sym, U, Mh), ops)."""
    n_sym, T = y.shape
    U, Mh = eff.shape[0], eff.shape[1]
    res_users = [[u for u in range(U) if i in occupied[u]] for i in range(T)]
    max_d = max((len(inc) for inc in res_users), default=0)
    chunk_sym = max(1, _MAX_TENSOR // max(Mh ** max_d, 1))

    posteriors = np.zeros((n_sym, U, Mh))
    ops = 0
    for start in range(0, n_sym, chunk_sym):
        chunk = slice(start, min(start + chunk_sym, n_sym))
        n_c = chunk.stop - chunk.start
        Ls = _likelihoods(y, eff, res_users, sigma2, chunk)
        mu_ur = {(u, i): np.full((n_c, Mh), 1.0 / Mh)
                 for i in range(T) for u in res_users[i]}
        mu_ru = {k: np.full((n_c, Mh), 1.0 / Mh) for k in mu_ur}
        for _ in range(n_iter):
            for i in range(T):
                inc = res_users[i]
                if not inc:
                    continue
                ops += n_c * Mh ** len(inc)
                outs = _resource_messages(Ls[i], [mu_ur[(v, i)] for v in inc], Mh)
                for u, out in zip(inc, outs):
                    norm = out.sum(axis=1, keepdims=True)
                    mu_ru[(u, i)] = out / np.maximum(norm, 1e-300)
            for u in range(U):
                for i in occupied[u]:
                    prod = np.ones((n_c, Mh))
                    for i2 in occupied[u]:
                        if i2 != i:
                            prod = prod * mu_ru[(u, i2)]
                    norm = prod.sum(axis=1, keepdims=True)
                    mu_ur[(u, i)] = prod / np.maximum(norm, 1e-300)
        post = np.ones((n_c, U, Mh))
        for u in range(U):
            for i in occupied[u]:
                post[:, u] *= mu_ru[(u, i)]
        posteriors[chunk] = post / np.maximum(post.sum(axis=2, keepdims=True), 1e-300)
    return posteriors, ops


def _effective_books(survivors, T, zero_word):
    Mh = survivors[0].codebook.M + (1 if zero_word else 0)
    eff = np.zeros((len(survivors), Mh, T), dtype=complex)
    occupied = []
    for u, s in enumerate(survivors):
        cw = s.codebook.entries
        if zero_word:
            cw = np.concatenate([cw, np.zeros((1, T), dtype=complex)], axis=0)
        eff[u] = cw * s.gains[None, :]
        occupied.append(np.where(np.any(np.abs(s.codebook.entries) > 0, axis=0))[0])
    return eff, occupied


def mpa_decode(inp: DecoderInput) -> DecodeResult:
    """Sum-product decode of all survivors; decisions by max posterior."""
    result = DecodeResult()
    if not inp.survivors:
        return result
    eff, occupied = _effective_books(inp.survivors, inp.y_data.shape[1], zero_word=False)
    posteriors, ops = _sum_product(inp.y_data, eff, occupied, inp.sigma2, inp.n_iter)
    result.complexity_ops = ops // max(inp.y_data.shape[0], 1)
    for u, s in enumerate(inp.survivors):
        post = posteriors[:, u, :]
        decisions = post.argmax(axis=1)
        result.posteriors[s.label] = post
        result.symbols[s.label] = decisions
        result.bits[s.label] = indices_to_bits(decisions, s.codebook.M)
    return result


def jmpa_decode(inp: DecoderInput) -> DecodeResult:
    """Two-step joint decode: classify activity via the zero codeword, then MPA.

    Step 1 augments every codebook with the all-zero codeword (uniform prior
    over M+1 hypotheses) and declares a UE inactive when its zero-codeword
    posterior averaged over the frame exceeds jmpa_theta. theta <= 0 disables
    the removal (every survivor is retained), which makes step 2 identical to
    a plain mpa_decode. Step 2 reruns plain MPA on the retained UEs.
    """
    result = DecodeResult(jmpa_active={}, zero_posterior={})
    if not inp.survivors:
        return result
    M = inp.survivors[0].codebook.M
    eff, occupied = _effective_books(inp.survivors, inp.y_data.shape[1], zero_word=True)
    posteriors, ops1 = _sum_product(inp.y_data, eff, occupied, inp.sigma2, inp.n_iter)
    retained = []
    for u, s in enumerate(inp.survivors):
        zp = float(posteriors[:, u, M].mean())
        active = not (inp.jmpa_theta > 0 and zp > inp.jmpa_theta)
        result.zero_posterior[s.label] = zp
        result.jmpa_active[s.label] = active
        if active:
            retained.append(s)
    step2 = mpa_decode(DecoderInput(y_data=inp.y_data, survivors=tuple(retained),
                                    sigma2=inp.sigma2, n_iter=inp.n_iter))
    result.symbols = step2.symbols
    result.bits = step2.bits
    result.posteriors = step2.posteriors
    result.complexity_ops = ops1 // max(inp.y_data.shape[0], 1) + step2.complexity_ops
    return result
