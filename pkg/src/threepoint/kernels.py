"""Matrix-valued Gegenbauer kernels in the variables ``u, v, t``.

``sphere_S(n, k, d)`` is the symmetrized ``d x d`` truncation of the
stabilizer kernel on ``S^{n-1}``; ``projective_S`` keeps the rows whose
index has the parity of ``k``.  ``make_T`` forms the shifted matrix
``(N-2) S(u,v,t) + S(u,u,1) + S(v,v,1) + S(t,t,1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .exact_arith import Scalar, common_q, to_exact
from .polynomials import TriPoly, gegenbauer, symmetrize

__all__ = [
    "KernelMatrix",
    "sphere_S",
    "projective_S",
    "make_T",
    "eval_kernel",
    "kernel_indices",
]

U, V, T = TriPoly.var(0), TriPoly.var(1), TriPoly.var(2)


@dataclass(frozen=True)
class KernelMatrix:
    n: int
    k: int
    d: int
    parity: str  # "sphere" or "projective"
    entries: tuple  # d x d tuple of TriPoly
    shifted: bool = False
    N: int | None = None

    def entry(self, i: int, j: int) -> TriPoly:
        return self.entries[i][j]

    @property
    def degree(self) -> int:
        return max(p.degree for row in self.entries for p in row)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "parity": self.parity,
            "entries": [[p.to_json() for p in row] for row in self.entries],
        }
        if self.shifted:
            out["N"] = self.N
        return out

    @classmethod
    def from_json(cls, data: dict) -> "KernelMatrix":
        entries = tuple(tuple(TriPoly.from_json(p) for p in row) for row in data["entries"])
        N = data.get("N")
        return cls(data["n"], data["k"], data["d"], data["parity"], entries, N is not None, N)


def kernel_indices(k: int, d: int, parity: str) -> list[int]:
    """Original row indices kept by a truncation of size ``d``."""
    if parity == "sphere":
        return list(range(d))
    if parity == "projective":
        return [k % 2 + 2 * r for r in range(d)]
    raise ValueError(f"unknown parity {parity!r}")


@lru_cache(maxsize=None)
def _core(n: int, k: int) -> TriPoly:
    """``((1-u^2)(1-v^2))^{k/2} P_k^{n-1}((t-uv)/sqrt(...))`` expanded."""
    p = gegenbauer(n - 1, k)
    w = (1 - U * U) * (1 - V * V)
    x = T - U * V
    acc = TriPoly()
    for j, c in enumerate(p.coeffs):
        if c == 0:
            continue
        # c_j vanishes unless j has the parity of k
        acc = acc + (x ** j) * (w ** ((k - j) // 2)) * c
    return acc


@lru_cache(maxsize=None)
def _entry(n: int, k: int, i: int, j: int) -> TriPoly:
    return symmetrize(_core(n, k).shift((i, j, 0)))


def _build(n: int, k: int, d: int, parity: str) -> KernelMatrix:
    if n < 3:
        raise ValueError("kernels need n >= 3")
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    idx = kernel_indices(k, d, parity)
    rows = []
    for a, i in enumerate(idx):
        row = []
        for b, j in enumerate(idx):
            row.append(_entry(n, k, min(i, j), max(i, j)))
        rows.append(tuple(row))
    return KernelMatrix(n, k, d, parity, tuple(rows))


def sphere_S(n: int, k: int, d: int) -> KernelMatrix:
    """Symmetrized ``d x d`` kernel ``S_k^n(u, v, t)`` on ``S^{n-1}``."""
    return _build(n, k, d, "sphere")


def projective_S(n: int, k: int, d: int) -> KernelMatrix:
    """Parity submatrix of ``S_k^n`` with ``d`` rows, indices ``= k mod 2``."""
    return _build(n, k, d, "projective")


def _shift_poly(p: TriPoly, N: int) -> TriPoly:
    diag = p.diagonal()
    return p * (N - 2) + diag.to_tripoly(0) + diag.to_tripoly(1) + diag.to_tripoly(2)


def make_T(S: KernelMatrix, N: int) -> KernelMatrix:
    """Entrywise ``(N-2) S(u,v,t) + S(u,u,1) + S(v,v,1) + S(t,t,1)``."""
    if N < 3:
        raise ValueError("make_T needs N >= 3")
    if S.shifted:
        raise ValueError("kernel is already shifted")
    cache: dict = {}
    rows = []
    for row in S.entries:
        out = []
        for p in row:
            key = id(p)
            if key not in cache:
                cache[key] = _shift_poly(p, N)
            out.append(cache[key])
        rows.append(tuple(out))
    return KernelMatrix(S.n, S.k, S.d, S.parity, tuple(rows), True, N)


def eval_kernel(K: KernelMatrix, point: Sequence) -> list[list[Scalar]]:
    """Exact evaluation at ``(u, v, t)``; returns a ``d x d`` matrix."""
    pt = tuple(to_exact(x) for x in point)
    if len(pt) != 3:
        raise ValueError("point must be a triple")
    common_q(pt)  # raises ContextError on mixed radicals
    if K.parity == "projective":
        # entries only involve u^2, v^2, t^2 and uvt, which stay in the field
        uu, vv, tt = (x * x for x in pt)
        uvt = pt[0] * pt[1] * pt[2]
        inv = (uu, vv, tt, uvt)
        cache: dict = {}

        def ev(p):
            if id(p) not in cache:
                cache[id(p)] = p.evaluate_invariants(*inv)
            return cache[id(p)]
    else:
        cache = {}

        def ev(p):
            if id(p) not in cache:
                cache[id(p)] = p.evaluate(pt)
            return cache[id(p)]

    return [[ev(p) for p in row] for row in K.entries]


def eval_kernel_invariants(K: KernelMatrix, uu, vv, tt, uvt) -> list[list[Scalar]]:
    """Projective kernel evaluated from squared coordinates and ``uvt``."""
    if K.parity != "projective":
        raise ValueError("invariant evaluation needs a projective kernel")
    cache: dict = {}
    out = []
    for row in K.entries:
        r = []
        for p in row:
            if id(p) not in cache:
                cache[id(p)] = p.evaluate_invariants(uu, vv, tt, uvt)
            r.append(cache[id(p)])
        out.append(r)
    return out
