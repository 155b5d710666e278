"""Vectorized evaluation of a ternary form on a coordinate box.

Coordinate i ranges over all polynomials of degree < dims[i]; polynomials are
rows of base-q digits (constant first), in the same order as
``ffpoly.enumerate_below``. Q(x) comes out as an int array of coefficients.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.ternary._linalg import Matrix
from src.ternary.ffpoly import Poly

# rows per chunk handed to numpy at once
CHUNK_ROWS = 1 << 16


def digit_table(q: int, n: int) -> np.ndarray:
    """Shape (q**n, n): row r holds the base-q digits of r, constant first."""
    if n <= 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(q**n, dtype=np.int64)
    cols = [(idx // q**k) % q for k in range(n)]
    return np.stack(cols, axis=1)


def poly_row(p: Poly, width: int) -> np.ndarray:
    out = np.zeros(width, dtype=np.int64)
    out[: len(p.coeffs)] = p.coeffs
    return out


def batch_mul(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Row-wise polynomial product of (N, la) and (N, lb) (or broadcastable) arrays."""
    la, lb = a.shape[-1], b.shape[-1]
    if la == 0 or lb == 0:
        shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (max(la + lb - 1, 0),)
        return np.zeros(shape, dtype=np.int64)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (la + lb - 1,)
    out = np.zeros(shape, dtype=np.int64)
    for i in range(la):
        out[..., i : i + lb] += a[..., i : i + 1] * b
    return out % q


def fit(arr: np.ndarray, width: int) -> np.ndarray:
    """Pad or cut the coefficient axis to ``width`` (cut part must be zero)."""
    n = arr.shape[-1]
    if n == width:
        return arr
    if n > width:
        return arr[..., :width]
    pad = [(0, 0)] * (arr.ndim - 1) + [(0, width - n)]
    return np.pad(arr, pad)


def degrees(values: np.ndarray) -> np.ndarray:
    """Degree of each row, -1 for the zero polynomial."""
    nonzero = values != 0
    width = values.shape[-1]
    last = width - 1 - np.argmax(nonzero[..., ::-1], axis=-1)
    return np.where(nonzero.any(axis=-1), last, -1)


def reduce_mod(values: np.ndarray, modulus: Poly) -> np.ndarray:
    """Row-wise remainder modulo a monic polynomial."""
    q = modulus.q
    m = np.array(modulus.coeffs, dtype=np.int64)
    dm = len(m) - 1
    rem = values.copy()
    for i in range(rem.shape[-1] - 1, dm - 1, -1):
        c = rem[..., i : i + 1]
        rem[..., i - dm : i + 1] = (rem[..., i - dm : i + 1] - c * m) % q
    return rem[..., :dm]


@dataclass
class BoxChunk:
    i1: int
    i2: np.ndarray
    i3: np.ndarray
    values: np.ndarray


class BoxEvaluator:
    """Q(x) for every x in a box, streamed in chunks over the first two coordinates."""

    def __init__(self, gram: Matrix, dims: Sequence[int], width: int):
        self.q = gram[0][0].q
        self.gram = gram
        self.dims = [max(0, d) for d in dims]
        self.width = width
        self.tables = [digit_table(self.q, d) for d in self.dims]
        self.g = [
            [poly_row(gram[i][j], max(1, len(gram[i][j].coeffs))) for j in range(3)]
            for i in range(3)
        ]

    @property
    def size(self) -> int:
        out = 1
        for t in self.tables:
            out *= t.shape[0]
        return out

    def vector(self, i1: int, i2: int, i3: int) -> Tuple[Poly, Poly, Poly]:
        return tuple(  # type: ignore[return-value]
            Poly(self.q, tuple(int(c) for c in t[i])) for t, i in zip(self.tables, (i1, i2, i3))
        )

    def _form(self, x: List[np.ndarray]) -> np.ndarray:
        q, w = self.q, self.width
        total = np.zeros(np.broadcast_shapes(*(a.shape[:-1] for a in x)) + (w,), dtype=np.int64)
        for i in range(3):
            for j in range(i, 3):
                if not self.g[i][j].any():
                    continue
                term = batch_mul(batch_mul(x[i], x[j], q), self.g[i][j][None, :], q)
                if i != j:
                    term = 2 * term
                total = total + fit(term, w)
        return total % q

    def chunks(self, rows: Optional[Sequence[int]] = None) -> Iterator[BoxChunk]:
        """Stream the box; ``rows`` restricts the first coordinate to those indices."""
        t1, t2, t3 = self.tables
        n2, n3 = t2.shape[0], t3.shape[0]
        block = max(1, CHUNK_ROWS // n3)
        i3_block = np.arange(n3)
        for i1 in range(t1.shape[0]) if rows is None else rows:
            x1 = t1[i1][None, :]
            for start in range(0, n2, block):
                stop = min(n2, start + block)
                i2 = np.repeat(np.arange(start, stop), n3)
                i3 = np.tile(i3_block, stop - start)
                values = self._form([x1, t2[i2], t3[i3]])
                yield BoxChunk(i1, i2, i3, values)
