"""Plane-wave basis enumeration and momentum sectors.

Single-particle states are box-normalized plane waves L^{-1/2} exp(i 2 pi n x / L)
labeled by integer momenta.  Three-body product states |n1 n2 p> carry the two
heavy momenta and the light momentum; total momentum n1 + n2 + p is conserved,
so the Hamiltonian is block diagonal over sectors of fixed total momentum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


class ResourceLimitError(Exception):
    """Requested basis exceeds the configured state budget."""


#: default cap on the number of product states enumerated at once
DEFAULT_MAX_STATES = 1_000_000

#: bytes per basis row used for the memory estimate in diagnostics
_ROW_BYTES = 9 * 2


@dataclass(frozen=True)
class BasisState1D:
    n1: int
    n2: int
    p: int


@dataclass(frozen=True)
class BasisState3D:
    n1: tuple[int, int, int]
    n2: tuple[int, int, int]
    p: tuple[int, int, int]


@dataclass
class Sector1D:
    """All 1D states of fixed total momentum, ordered lexicographically by (n1, n2)."""

    total_momentum: int
    n1: np.ndarray
    n2: np.ndarray
    p: np.ndarray
    _index: dict = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.n1)

    @property
    def key(self) -> str:
        return f"P={self.total_momentum}"

    def state(self, i: int) -> BasisState1D:
        return BasisState1D(int(self.n1[i]), int(self.n2[i]), int(self.p[i]))

    def index_map(self) -> dict:
        """Map (n1, n2) -> row index.  p is fixed by the sector."""
        if self._index is None:
            self._index = {
                (int(a), int(b)): i
                for i, (a, b) in enumerate(zip(self.n1, self.n2))
            }
        return self._index

    def exchange_map(self) -> np.ndarray:
        """Index permutation realizing heavy-particle exchange n1 <-> n2."""
        idx = self.index_map()
        out = np.empty(self.dim, dtype=np.int64)
        for i in range(self.dim):
            out[i] = idx[(int(self.n2[i]), int(self.n1[i]))]
        return out


@dataclass
class Sector3D:
    """All 3D states of fixed total momentum vector, ordered lexicographically by (n1, n2)."""

    total_momentum: tuple[int, int, int]
    n1: np.ndarray   # (N, 3) int
    n2: np.ndarray
    p: np.ndarray
    _index: dict = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.n1)

    @property
    def key(self) -> str:
        return "P=({},{},{})".format(*self.total_momentum)

    def state(self, i: int) -> BasisState3D:
        return BasisState3D(tuple(int(v) for v in self.n1[i]),
                            tuple(int(v) for v in self.n2[i]),
                            tuple(int(v) for v in self.p[i]))

    def index_map(self) -> dict:
        if self._index is None:
            self._index = {
                (tuple(int(v) for v in a), tuple(int(v) for v in b)): i
                for i, (a, b) in enumerate(zip(self.n1, self.n2))
            }
        return self._index

    def exchange_map(self) -> np.ndarray:
        idx = self.index_map()
        out = np.empty(self.dim, dtype=np.int64)
        for i in range(self.dim):
            key = (tuple(int(v) for v in self.n2[i]), tuple(int(v) for v in self.n1[i]))
            out[i] = idx[key]
        return out


@dataclass
class SymmetrizedSector:
    """Exchange eigenbasis built on top of a plain sector.

    Each row combines a state and its heavy-exchange image,
    (|a b> + parity |b a>) / norm_c, with norm_c = sqrt(2) off the diagonal
    and 2 on it.  Diagonal states n1 = n2 appear only at parity +1.
    """

    parent: object            # Sector1D or Sector3D
    parity: int               # +1 symmetric, -1 antisymmetric
    idx_a: np.ndarray
    idx_b: np.ndarray
    norm_c: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.idx_a)

    @property
    def key(self) -> str:
        tag = "sym" if self.parity == 1 else "anti"
        return f"{self.parent.key} {tag}"

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Expand symmetrized coordinates into the plain sector."""
        if len(vec) != self.dim:
            raise ValueError(f"vector length {len(vec)} != sector dim {self.dim}")
        out = np.zeros(self.parent.dim, dtype=np.result_type(vec.dtype, np.float64))
        # each parent index occurs in exactly one entry, so plain assignment is safe
        diag = self.idx_a == self.idx_b
        off = ~diag
        w = 1.0 / np.sqrt(2.0)
        out[self.idx_a[off]] = w * vec[off]
        out[self.idx_b[off]] = self.parity * w * vec[off]
        out[self.idx_a[diag]] = vec[diag]
        return out

    def project(self, vec: np.ndarray) -> np.ndarray:
        """Adjoint of embed: restrict a plain-sector vector to this parity block."""
        if len(vec) != self.parent.dim:
            raise ValueError(f"vector length {len(vec)} != parent dim {self.parent.dim}")
        diag = self.idx_a == self.idx_b
        out = (vec[self.idx_a] + self.parity * vec[self.idx_b]) / np.sqrt(2.0)
        out[diag] = vec[self.idx_a[diag]]
        return out

    def embedding_matrix(self) -> np.ndarray:
        """Dense (parent.dim x dim) isometry S with S^T S = identity."""
        s = np.zeros((self.parent.dim, self.dim))
        for col in range(self.dim):
            a, b = int(self.idx_a[col]), int(self.idx_b[col])
            if a == b:
                s[a, col] = 1.0
            else:
                s[a, col] = 1.0 / np.sqrt(2.0)
                s[b, col] = self.parity / np.sqrt(2.0)
        return s


def enumerate_basis_1d(params, total_momentum: int = 0) -> Sector1D:
    """Enumerate the 1D sector of fixed total momentum.

    Heavy momenta run over [-heavy_cutoff, heavy_cutoff]^2; the light momentum
    is fixed by momentum balance.  In product-filter mode states whose light
    momentum exceeds the cutoff are dropped.
    """
    from .params import LightCutoffMode

    c = params.heavy_cutoff
    rng = np.arange(-c, c + 1)
    n1, n2 = np.meshgrid(rng, rng, indexing="ij")
    n1 = n1.ravel()
    n2 = n2.ravel()
    p = total_momentum - n1 - n2
    if params.light_cutoff_mode is LightCutoffMode.PRODUCT_FILTER:
        keep = np.abs(p) <= c
        n1, n2, p = n1[keep], n2[keep], p[keep]
    return Sector1D(total_momentum, n1.astype(np.int64), n2.astype(np.int64),
                    p.astype(np.int64))


def enumerate_vectors(cutoff_sq: int) -> np.ndarray:
    """Integer 3-vectors with |n|^2 <= cutoff_sq, sorted lexicographically."""
    c = int(np.floor(np.sqrt(cutoff_sq)))
    rng = range(-c, c + 1)
    vecs = [v for v in itertools.product(rng, rng, rng)
            if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= cutoff_sq]
    vecs.sort()
    return np.array(vecs, dtype=np.int64).reshape(len(vecs), 3)


def basis_size_3d(cutoff_sq: int) -> tuple[int, int]:
    """(number of single-particle vectors, number of product states)."""
    nv = len(enumerate_vectors(cutoff_sq))
    return nv, nv ** 3


def estimate_basis_bytes(n_states: int) -> int:
    return n_states * _ROW_BYTES


def enumerate_basis_3d(params, cutoff_sq: int | None = None,
                       max_states: int = DEFAULT_MAX_STATES) -> dict:
    """Enumerate all 3D product states and partition them into momentum sectors.

    Returns a dict mapping total-momentum tuples to Sector3D.  Raises
    ResourceLimitError before allocating anything when the product basis
    exceeds max_states.
    """
    if cutoff_sq is None:
        cutoff_sq = params.cutoff_sq
    n_vec, n_states = basis_size_3d(cutoff_sq)
    if n_states > max_states:
        mb = estimate_basis_bytes(n_states) / 2 ** 20
        raise ResourceLimitError(
            f"cutoff_sq={cutoff_sq} gives {n_vec} vectors and {n_states} product "
            f"states (~{mb:.0f} MB of labels), over the budget of {max_states}; "
            f"raise the budget explicitly to proceed")
    vecs = enumerate_vectors(cutoff_sq)
    sectors: dict[tuple[int, int, int], list] = {}
    for i1 in range(n_vec):
        for i2 in range(n_vec):
            for i3 in range(n_vec):
                total = tuple(int(v) for v in vecs[i1] + vecs[i2] + vecs[i3])
                sectors.setdefault(total, []).append((i1, i2, i3))
    out = {}
    for total, rows in sorted(sectors.items()):
        rows = np.array(rows, dtype=np.int64)
        out[total] = Sector3D(total, vecs[rows[:, 0]], vecs[rows[:, 1]],
                              vecs[rows[:, 2]])
    return out


def sector_3d(params, total_momentum=(0, 0, 0),
              cutoff_sq: int | None = None) -> Sector3D:
    """Enumerate a single 3D momentum sector without building the full basis.

    For fixed (n1, n2) the light momentum is p = P - n1 - n2; the state is
    kept when p also satisfies the per-vector cutoff.
    """
    if cutoff_sq is None:
        cutoff_sq = params.cutoff_sq
    vecs = enumerate_vectors(cutoff_sq)
    total = np.asarray(total_momentum, dtype=np.int64)
    rows_n1, rows_n2, rows_p = [], [], []
    for i in range(len(vecs)):
        pc = total - vecs[i] - vecs          # candidate light momenta vs all n2
        keep = np.einsum("ij,ij->i", pc, pc) <= cutoff_sq
        if np.any(keep):
            rows_n1.append(np.repeat(vecs[i][None, :], int(keep.sum()), axis=0))
            rows_n2.append(vecs[keep])
            rows_p.append(pc[keep])
    if not rows_n1:
        empty = np.zeros((0, 3), dtype=np.int64)
        return Sector3D(tuple(int(v) for v in total), empty, empty.copy(), empty.copy())
    return Sector3D(tuple(int(v) for v in total),
                    np.concatenate(rows_n1), np.concatenate(rows_n2),
                    np.concatenate(rows_p))


def symmetrize_sector(sector) -> tuple[SymmetrizedSector, SymmetrizedSector]:
    """Split a sector into heavy-exchange symmetric and antisymmetric blocks.

    Returns (symmetric, antisymmetric).  Block dimensions add up to the
    parent dimension; diagonal states contribute to the symmetric block only.
    """
    xmap = sector.exchange_map()
    sym_a, sym_b, sym_c = [], [], []
    anti_a, anti_b, anti_c = [], [], []
    for i in range(sector.dim):
        j = int(xmap[i])
        if i < j:
            sym_a.append(i); sym_b.append(j); sym_c.append(np.sqrt(2.0))
            anti_a.append(i); anti_b.append(j); anti_c.append(np.sqrt(2.0))
        elif i == j:
            sym_a.append(i); sym_b.append(i); sym_c.append(2.0)
    sym = SymmetrizedSector(sector, 1, np.array(sym_a, dtype=np.int64),
                            np.array(sym_b, dtype=np.int64), np.array(sym_c))
    anti = SymmetrizedSector(sector, -1, np.array(anti_a, dtype=np.int64),
                             np.array(anti_b, dtype=np.int64), np.array(anti_c))
    return sym, anti


def sector_summary(sectors: dict) -> list[dict]:
    """JSON-ready per-sector statistics for run manifests."""
    out = []
    for total, sec in sectors.items():
        out.append({"total_momentum": list(total), "dimension": sec.dim})
    return out
