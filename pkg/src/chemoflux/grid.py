"""Cell-centred rectangular meshes and conservative discrete calculus.

Fields are plain numpy arrays of shape ``grid.shape``. Face arrays are lists
with one array per axis; the array for axis ``k`` has ``cells[k] + 1``
entries along that axis, the first and last of which are boundary faces and
always carry zero (no-flux boundary).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

MIN_CELLS = 4
MAX_CELLS = 2**20


@dataclass(frozen=True)
class Grid:
    extent: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        extent = tuple(float(e) for e in np.atleast_1d(self.extent))
        cells = tuple(int(c) for c in np.atleast_1d(self.cells))
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "cells", cells)
        if len(extent) != len(cells) or len(cells) not in (1, 2):
            raise ValueError("grid must be 1D or 2D with one extent per axis")
        if any(not np.isfinite(e) or e <= 0 for e in extent):
            raise ValueError("extents must be positive")
        if any(c < MIN_CELLS or c > MAX_CELLS for c in cells):
            raise ValueError(f"cells per axis must lie in [{MIN_CELLS}, {MAX_CELLS}]")

    @classmethod
    def uniform(cls, extent, cells):
        return cls(tuple(np.atleast_1d(extent)), tuple(np.atleast_1d(cells)))

    @property
    def n(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @cached_property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @cached_property
    def h(self) -> tuple[float, ...]:
        return tuple(e / c for e, c in zip(self.extent, self.cells))

    @cached_property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @cached_property
    def volume(self) -> float:
        return float(np.prod(self.extent))

    def centers(self) -> list[np.ndarray]:
        return [(np.arange(c) + 0.5) * h for c, h in zip(self.cells, self.h)]

    def faces(self, axis: int) -> np.ndarray:
        return np.arange(self.cells[axis] + 1) * self.h[axis]

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.centers(), indexing="ij"))

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(*coords)`` at cell centres."""
        return np.asarray(func(*self.mesh()), dtype=float) * np.ones(self.shape)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        return f

    # ---- reductions -------------------------------------------------------

    def integral(self, f) -> float:
        return float(self.check(f).sum()) * self.cell_volume

    def mean(self, f) -> float:
        return float(self.check(f).mean())

    def l2_dist_sq_to_mean(self, f) -> float:
        f = self.check(f)
        return self.integral((f - self.mean(f)) ** 2)

    def lp_norm(self, f, r: float) -> float:
        return float(self.integral(np.abs(self.check(f)) ** r) ** (1.0 / r))

    # ---- face calculus ----------------------------------------------------

    def _interior(self, axis):
        lo = [slice(None)] * self.n
        hi = [slice(None)] * self.n
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        return tuple(lo), tuple(hi)

    def _face_shape(self, axis):
        shape = list(self.shape)
        shape[axis] += 1
        return tuple(shape)

    def face_gradient(self, f) -> list[np.ndarray]:
        """Centred differences on interior faces, zero on boundary faces."""
        f = self.check(f)
        out = []
        for axis in range(self.n):
            g = np.zeros(self._face_shape(axis))
            lo, hi = self._interior(axis)
            inner = [slice(None)] * self.n
            inner[axis] = slice(1, -1)
            g[tuple(inner)] = (f[hi] - f[lo]) / self.h[axis]
            out.append(g)
        return out

    def face_average(self, f) -> list[np.ndarray]:
        """Arithmetic mean of the two neighbouring cells on each interior face."""
        f = self.check(f)
        out = []
        for axis in range(self.n):
            g = np.zeros(self._face_shape(axis))
            lo, hi = self._interior(axis)
            inner = [slice(None)] * self.n
            inner[axis] = slice(1, -1)
            g[tuple(inner)] = 0.5 * (f[hi] + f[lo])
            out.append(g)
        return out

    def face_upwind(self, f, velocity: list[np.ndarray]) -> list[np.ndarray]:
        """Value of ``f`` at the upwind cell of each face for the given face velocity."""
        f = self.check(f)
        out = []
        for axis in range(self.n):
            g = np.zeros(self._face_shape(axis))
            lo, hi = self._interior(axis)
            inner = [slice(None)] * self.n
            inner[axis] = slice(1, -1)
            c = velocity[axis][tuple(inner)]
            g[tuple(inner)] = np.where(c > 0, f[lo], f[hi])
            out.append(g)
        return out

    def divergence(self, flux: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.shape)
        for axis in range(self.n):
            F = np.array(flux[axis], dtype=float)
            if F.shape != self._face_shape(axis):
                raise ValueError(f"face array for axis {axis} has shape {F.shape}")
            first = [slice(None)] * self.n
            last = [slice(None)] * self.n
            first[axis] = 0
            last[axis] = -1
            F[tuple(first)] = 0.0
            F[tuple(last)] = 0.0
            lo, hi = self._interior(axis)
            lo_f = [slice(None)] * self.n
            lo_f[axis] = slice(None, -1)
            hi_f = [slice(None)] * self.n
            hi_f[axis] = slice(1, None)
            out += (F[tuple(hi_f)] - F[tuple(lo_f)]) / self.h[axis]
        return out

    def face_inner(self, a: list[np.ndarray], b: list[np.ndarray]) -> float:
        """Quadrature of ``a . b`` over faces; matches ``-integral(g * div F)``."""
        return self.cell_volume * float(sum(np.sum(x * y) for x, y in zip(a, b)))

    def laplacian_apply(self, f) -> np.ndarray:
        return self.divergence(self.face_gradient(f))

    # ---- sparse operators -------------------------------------------------

    @cached_property
    def _face_pairs(self):
        idx = np.arange(self.size).reshape(self.shape)
        pairs = []
        for axis in range(self.n):
            lo, hi = self._interior(axis)
            pairs.append((idx[lo].ravel(), idx[hi].ravel()))
        return pairs

    def interior_face_values(self, faces: list[np.ndarray]) -> list[np.ndarray]:
        out = []
        for axis in range(self.n):
            inner = [slice(None)] * self.n
            inner[axis] = slice(1, -1)
            out.append(np.asarray(faces[axis])[tuple(inner)].ravel())
        return out

    @cached_property
    def _laplacian_pattern(self):
        # CSR structure of div(c grad .) plus a scatter map from interior-face
        # coefficients to CSR data, so that varying coefficients reuse one pattern
        rows, cols, face, sign = [], [], [], []
        offset = 0
        for i, j in self._face_pairs:
            f = offset + np.arange(i.size)
            rows += [i, j, i, j]
            cols += [j, i, i, j]
            face += [f, f, f, f]
            sign += [np.ones(i.size), np.ones(i.size), -np.ones(i.size), -np.ones(i.size)]
            offset += i.size
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        face, sign = np.concatenate(face), np.concatenate(sign)
        pattern = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(self.size, self.size)).tocsr()
        pattern.sum_duplicates()
        pattern.sort_indices()
        row_of = np.repeat(np.arange(self.size), np.diff(pattern.indptr))
        keys = row_of.astype(np.int64) * self.size + pattern.indices
        pos = np.searchsorted(keys, rows.astype(np.int64) * self.size + cols)
        scatter = sp.coo_matrix((sign, (pos, face)), shape=(keys.size, offset)).tocsr()
        inv_h2 = np.concatenate([np.full(i.size, 1.0 / h**2) for (i, _), h in zip(self._face_pairs, self.h)])
        cells = np.arange(self.size, dtype=np.int64)
        diag = np.searchsorted(keys, cells * self.size + cells)
        return pattern.indices.copy(), pattern.indptr.copy(), scatter, inv_h2, diag

    def laplacian(self, face_coeff: list[np.ndarray] | None = None) -> sp.csr_matrix:
        """Sparse matrix of ``f -> div(c grad f)`` on flattened (row-major) fields.

        ``face_coeff`` defaults to 1 on every face, giving the 3-point / 5-point
        Neumann Laplacian.
        """
        return self.operator(0.0, 1.0, face_coeff)

    def operator(self, shift: float, scale: float, face_coeff=None) -> sp.csr_matrix:
        """``shift * I + scale * div(c grad .)`` assembled on the cached pattern."""
        indices, indptr, scatter, inv_h2, diag = self._laplacian_pattern
        if face_coeff is None:
            a = scale * inv_h2
        else:
            a = scale * np.concatenate(self.interior_face_values(face_coeff)) * inv_h2
        data = scatter @ a
        data[diag] += shift
        return sp.csr_matrix((data, indices, indptr), shape=(self.size, self.size))
