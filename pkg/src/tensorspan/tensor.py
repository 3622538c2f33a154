"""Dense complex tensors with a fixed vectorization convention.

A tensor of format ``(n_1, ..., n_k)`` is stored as a complex ndarray of
that shape.  The canonical linear order of the entries is C order, i.e.
the *last* index varies fastest; :meth:`CTensor.vectorize` and the JSON
file format both use it.  All indices are 0-based.

The complex inner product used throughout is the plain bilinear sum
``sum(t_J * s_J)`` with no conjugation.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from functools import lru_cache, reduce
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "Format",
    "CTensor",
    "MultiIndex",
    "contract",
    "multilinear_value",
    "frobenius_inner",
    "rank_one",
    "slice_fiber",
    "random_tensor",
    "pad_last_factor",
    "tensor_to_json_dict",
    "tensor_from_json_dict",
    "save_tensor",
    "load_tensor",
]

# A multi-index is a plain tuple of 0-based factor indices.
MultiIndex = tuple

_MAX_SIZE = 2**40  # entries; guards against address-space overflow


@dataclass(frozen=True)
class Format:
    """Tensor format ``(n_1, ..., n_k)`` with ``k >= 2`` and ``n_i >= 2``.

    Factors of dimension one are rejected rather than collapsed: the affine
    chart ``x_{i,0} = 1`` used by the singular-tuple system needs every
    factor to have at least one free coordinate.
    """

    dims: tuple[int, ...]

    def __init__(self, dims: Sequence[int]):
        dims = tuple(int(n) for n in dims)
        if len(dims) < 2:
            raise ValueError(f"format needs at least 2 factors, got {dims}")
        if any(n < 2 for n in dims):
            raise ValueError(f"every factor dimension must be >= 2, got {dims}")
        size = 1
        for n in dims:
            size *= n
            if size > _MAX_SIZE:
                raise ValueError(f"format {dims} exceeds addressable size")
        object.__setattr__(self, "dims", dims)

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def __iter__(self):
        return iter(self.dims)

    def __str__(self) -> str:
        return "(" + ",".join(str(n) for n in self.dims) + ")"


def _check_format_of(arr: np.ndarray, fmt: Format) -> None:
    if arr.shape != fmt.dims:
        raise ValueError(f"array of shape {arr.shape} does not match format {fmt}")


@dataclass(frozen=True)
class CTensor:
    """Immutable dense complex tensor of a given :class:`Format`."""

    fmt: Format
    array: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.array, dtype=np.complex128)
        _check_format_of(arr, self.fmt)
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "CTensor":
        return cls(Format(arr.shape), arr)

    @classmethod
    def from_vector(cls, fmt: Format, vec: np.ndarray) -> "CTensor":
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (fmt.size,):
            raise ValueError(f"entry vector of length {vec.size} does not match format {fmt}")
        return cls(fmt, vec.reshape(fmt.dims))

    def vectorize(self) -> np.ndarray:
        """Entries in canonical order (last index fastest)."""
        return self.array.reshape(-1)

    def norm(self) -> float:
        """Hermitian Frobenius norm ``sqrt(sum |t_J|^2)``."""
        return float(np.linalg.norm(self.array))

    def __getitem__(self, idx: MultiIndex) -> complex:
        return complex(self.array[idx])


_AX = string.ascii_lowercase


@lru_cache(maxsize=None)
def _contract_spec(k: int, skip: int) -> str:
    axes = _AX[:k]
    ops = [axes] + [axes[j] for j in range(k) if j != skip]
    return ",".join(ops) + "->" + axes[skip]


@lru_cache(maxsize=None)
def _full_spec(k: int) -> str:
    axes = _AX[:k]
    return ",".join([axes] + list(axes)) + "->"


def _as_vector(v: np.ndarray, n: int, where: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (n,):
        raise ValueError(f"{where}: expected a vector of length {n}, got shape {v.shape}")
    return v


def contract(t: CTensor, x: Sequence[np.ndarray], skip: int) -> np.ndarray:
    """Contract ``t`` against every vector in ``x`` except factor ``skip``.

    Component ``s`` of the result is the sum over all multi-indices with
    ``j_skip = s`` of ``t_J * prod_{l != skip} x[l][j_l]``.  ``x[skip]`` is
    ignored and may be ``None``.
    """
    k = t.fmt.k
    if not 0 <= skip < k:
        raise ValueError(f"skip index {skip} out of range for {k} factors")
    if len(x) != k:
        raise ValueError(f"expected {k} vectors, got {len(x)}")
    vecs = [_as_vector(x[j], t.fmt.dims[j], f"factor {j}") for j in range(k) if j != skip]
    return np.einsum(_contract_spec(k, skip), t.array, *vecs)


def multilinear_value(t: CTensor, x: Sequence[np.ndarray]) -> complex:
    """The k-linear form of ``t`` evaluated at ``x``: full contraction."""
    k = t.fmt.k
    if len(x) != k:
        raise ValueError(f"expected {k} vectors, got {len(x)}")
    vecs = [_as_vector(x[j], t.fmt.dims[j], f"factor {j}") for j in range(k)]
    return complex(np.einsum(_full_spec(k), t.array, *vecs))


def frobenius_inner(t: CTensor, s: CTensor) -> complex:
    """Bilinear (non-conjugated) coordinate sum ``sum(t_J * s_J)``."""
    if t.fmt != s.fmt:
        raise ValueError(f"format mismatch: {t.fmt} vs {s.fmt}")
    return complex(np.sum(t.array * s.array))


def rank_one(x: Sequence[np.ndarray]) -> CTensor:
    """The decomposable tensor ``x_1 (x) ... (x) x_k``."""
    if len(x) < 2:
        raise ValueError("rank_one needs at least 2 vectors")
    vecs = [np.asarray(v, dtype=np.complex128).reshape(-1) for v in x]
    fmt = Format([v.size for v in vecs])
    return CTensor(fmt, reduce(np.multiply.outer, vecs))


def slice_fiber(t: CTensor, prefix: MultiIndex) -> np.ndarray:
    """The last-factor fiber ``s -> t[prefix, s]`` for a 0-based prefix."""
    dims = t.fmt.dims
    prefix = tuple(int(i) for i in prefix)
    if len(prefix) != len(dims) - 1:
        raise ValueError(f"prefix {prefix} must index the first {len(dims) - 1} factors")
    for i, (p, n) in enumerate(zip(prefix, dims)):
        if not 0 <= p < n:
            raise ValueError(f"prefix index {p} out of range [0, {n}) in factor {i}")
    return np.array(t.array[prefix])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_tensor(fmt: Format, seed) -> CTensor:
    """Random tensor with i.i.d. standard complex Gaussian entries.

    Real and imaginary parts are independent N(0, 1); ``seed`` may be an
    integer or a ``numpy.random.Generator`` (consumed in place).
    """
    rng = _rng(seed)
    re = rng.standard_normal(fmt.dims)
    im = rng.standard_normal(fmt.dims)
    return CTensor(fmt, re + 1j * im)


def pad_last_factor(t: CTensor, new_last_dim: int) -> CTensor:
    """Zero-pad the last factor of ``t`` from ``n_k`` up to ``new_last_dim``."""
    dims = t.fmt.dims
    if new_last_dim < dims[-1]:
        raise ValueError(f"cannot shrink last factor from {dims[-1]} to {new_last_dim}")
    out = np.zeros(dims[:-1] + (new_last_dim,), dtype=np.complex128)
    out[..., : dims[-1]] = t.array
    return CTensor(Format(dims[:-1] + (new_last_dim,)), out)


def tensor_to_json_dict(t: CTensor) -> dict:
    vec = t.vectorize()
    return {
        "format": list(t.fmt.dims),
        "re": vec.real.tolist(),
        "im": vec.imag.tolist(),
    }


def tensor_from_json_dict(d: dict) -> CTensor:
    for key in ("format", "re", "im"):
        if key not in d:
            raise ValueError(f"tensor JSON is missing the '{key}' field")
    fmt = Format(d["format"])
    re = np.asarray(d["re"], dtype=np.float64)
    im = np.asarray(d["im"], dtype=np.float64)
    if re.shape != (fmt.size,) or im.shape != (fmt.size,):
        raise ValueError(
            f"tensor JSON entry arrays have lengths {re.size}/{im.size}, "
            f"expected {fmt.size} for format {fmt}"
        )
    return CTensor.from_vector(fmt, re + 1j * im)


def save_tensor(t: CTensor, path) -> None:
    Path(path).write_text(json.dumps(tensor_to_json_dict(t)))


def load_tensor(path) -> CTensor:
    text = Path(path).read_text()
    return tensor_from_json_dict(json.loads(text))
