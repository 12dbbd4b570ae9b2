"""SCMA codebooks, bit mapping, and the resource/UE factor graph.

A codebook maps log2(M) bits to one of M sparse length-T codewords whose
nonzero positions follow one factor-graph column. The default instance
(T=4, N=2, M=4, J=6) ships as a JSON asset; any codebook file obeying the
same schema and invariants can be loaded instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from itertools import combinations
from math import comb, log2
from pathlib import Path

import numpy as np

__all__ = [
    "FactorGraph",
    "Codebook",
    "CodewordStream",
    "CodebookFormatError",
    "build_factor_graph",
    "load_codebook",
    "load_codebook_file",
    "default_codebooks",
    "encode",
    "bits_to_indices",
    "indices_to_bits",
]

ENERGY_TOL = 1e-9


class CodebookFormatError(ValueError):
    """Codebook file is malformed or violates the sparsity/energy invariants."""


@dataclass(frozen=True)
class FactorGraph:
    """Binary T x J occupancy of shared resources by UE codebooks."""

    T: int
    J: int
    N: int
    occupancy: np.ndarray  # (T, J) 0/1

    @property
    def degrees(self) -> np.ndarray:
        """d(i): number of UEs occupying each resource."""
        return self.occupancy.sum(axis=1)

    def resources_of(self, col: int) -> np.ndarray:
        return np.where(self.occupancy[:, col])[0]

    def occupants_of(self, resource: int) -> np.ndarray:
        return np.where(self.occupancy[resource, :])[0]


def build_factor_graph(T: int, J: int, N: int) -> FactorGraph:
    """Canonical graph: columns are the J lexicographically-first N-subsets of the T rows."""
    if N < 1 or N > T:
        raise ValueError(f"need 1 <= N <= T, got N={N}, T={T}")
    if comb(T, N) < J:
        raise ValueError(f"cannot place {J} codebooks: only C({T},{N})={comb(T, N)} "
                         f"distinct {N}-subsets of {T} resources exist")
    occ = np.zeros((T, J), dtype=int)
    for j, rows in enumerate(combinations(range(T), N)):
        if j >= J:
            break
        occ[list(rows), j] = 1
    return FactorGraph(T=T, J=J, N=N, occupancy=occ)


@dataclass(frozen=True)
class Codebook:
    """One group's M codewords, entries shape (M, T) complex."""

    group_id: int
    entries: np.ndarray

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def T(self) -> int:
        return self.entries.shape[1]

    @property
    def bits_per_symbol(self) -> int:
        return int(log2(self.M))


@dataclass(frozen=True)
class CodewordStream:
    """Encoded symbol indices; bits_consumed = len(symbols) * log2(M)."""

    symbols: np.ndarray
    bits_consumed: int


def _validate_codebook(cb: Codebook, graph: FactorGraph) -> None:
    if cb.entries.shape != (cb.M, graph.T):
        raise CodebookFormatError(
            f"group {cb.group_id}: entries shape {cb.entries.shape} does not match T={graph.T}")
    col = graph.occupancy[:, cb.group_id - 1]
    nz = np.abs(cb.entries) > 0
    for m in range(cb.M):
        if nz[m].sum() != graph.N:
            raise CodebookFormatError(
                f"group {cb.group_id} codeword {m}: {int(nz[m].sum())} nonzeros, expected N={graph.N}")
        if np.any(nz[m] & (col == 0)):
            raise CodebookFormatError(
                f"group {cb.group_id} codeword {m}: nonzero outside the factor-graph column")
    mean_energy = float((np.abs(cb.entries) ** 2).sum(axis=1).mean())
    if abs(mean_energy - 1.0) > ENERGY_TOL:
        raise CodebookFormatError(
            f"group {cb.group_id}: mean codeword energy {mean_energy!r} not 1 within {ENERGY_TOL}")


def _parse_codebook_json(raw: dict, graph: FactorGraph) -> list[Codebook]:
    try:
        T, M, N = int(raw["T"]), int(raw["M"]), int(raw["N"])
        groups = raw["codebooks"]
    except (KeyError, TypeError) as exc:
        raise CodebookFormatError(f"missing or malformed field: {exc}") from exc
    if (T, N) != (graph.T, graph.N):
        raise CodebookFormatError(
            f"file declares T={T}, N={N} but factor graph has T={graph.T}, N={graph.N}")
    if M < 2 or (M & (M - 1)) != 0:
        raise CodebookFormatError(f"M={M} must be a power of two")
    if len(groups) != graph.J:
        raise CodebookFormatError(f"file has {len(groups)} codebooks, factor graph has J={graph.J}")
    books = []
    for g in groups:
        try:
            gid = int(g["group"])
            entries = np.array([[complex(re, im) for re, im in row] for row in g["entries"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise CodebookFormatError(f"malformed codebook entry: {exc}") from exc
        if entries.shape != (M, T):
            raise CodebookFormatError(f"group {gid}: expected {M}x{T} entries, got {entries.shape}")
        cb = Codebook(group_id=gid, entries=entries)
        _validate_codebook(cb, graph)
        books.append(cb)
    books.sort(key=lambda cb: cb.group_id)
    if [cb.group_id for cb in books] != list(range(1, graph.J + 1)):
        raise CodebookFormatError("group ids must be exactly 1..J")
    return books


def load_codebook_file(path: str | Path, graph: FactorGraph) -> list[Codebook]:
    """Load and validate codebooks from a JSON file against a factor graph."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CodebookFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise CodebookFormatError(f"{path}: top level must be an object")
    return _parse_codebook_json(raw, graph)


# spec name for the file-loading operation
load_codebook = load_codebook_file


def default_codebooks(graph: FactorGraph | None = None) -> tuple[FactorGraph, list[Codebook]]:
    """The bundled T=4/N=2/M=4/J=6 instance."""
    if graph is None:
        graph = build_factor_graph(T=4, J=6, N=2)
    ref = resources.files("gfscma").joinpath("assets/default_codebook.json")
    with resources.as_file(ref) as path:
        return graph, load_codebook_file(path, graph)


def bits_to_indices(bits: np.ndarray, M: int) -> np.ndarray:
    """Pack big-endian groups of log2(M) bits into codeword indices."""
    bits = np.asarray(bits, dtype=int)
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0/1")
    k = int(log2(M))
    if bits.size % k:
        raise ValueError(f"bit count {bits.size} not divisible by log2(M)={k}")
    groups = bits.reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1)
    return groups @ weights


def indices_to_bits(indices: np.ndarray, M: int) -> np.ndarray:
    """Inverse of bits_to_indices (big-endian)."""
    k = int(log2(M))
    idx = np.asarray(indices, dtype=int)
    out = np.zeros((idx.size, k), dtype=int)
    for pos in range(k):
        out[:, pos] = (idx >> (k - 1 - pos)) & 1
    return out.ravel()


def encode(bits: np.ndarray, cb: Codebook) -> tuple[CodewordStream, np.ndarray]:
    """Map a bit sequence to codeword indices and their T-dimensional vectors."""
    idx = bits_to_indices(bits, cb.M)
    stream = CodewordStream(symbols=idx, bits_consumed=int(np.asarray(bits).size))
    return stream, cb.entries[idx]
