"""Covariance pairs from JSON input documents and seeded named families.

Input document (one of)::

    {"pair":   {"dim": 2, "sigma0": [[1, 0], [0, 1]], "sigma1": [1, 0, 0, 2]}}
    {"sigma":  {"dim": 2, "entries": [2, 0, 0, 3]}}
    {"family": {"name": "ar1", "params": {"dim": 4, "rho0": 0.2, "rho1": 0.6}, "seed": 7}}

Matrices may be nested rows or a flat row-major list of length dim*dim.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from . import rng as _rng
from .errors import InputError
from .spd import GaussianPair, SpdMatrix, validate_spd

FAMILIES = ("scaled", "diagonal", "ar1", "random_spd")


class ParseError(InputError):
    pass


def _matrix(value: Any, dim: int, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: not a numeric matrix ({exc})") from None
    if arr.ndim == 1:
        if arr.size != dim * dim:
            raise ParseError(f"{where}: flat list has {arr.size} entries, expected dim*dim = {dim * dim}")
        arr = arr.reshape(dim, dim)
    if arr.shape != (dim, dim):
        raise ParseError(f"{where}: shape {arr.shape} does not match dim={dim}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{where}: entries must be finite")
    return arr


def _dim(block: dict, where: str) -> int:
    dim = block.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"{where}.dim: expected a positive integer, got {dim!r}")
    return dim


def _param(params: dict, key: str, where: str, default=None, kind=float):
    if key not in params:
        if default is None:
            raise ParseError(f"{where}.{key}: required parameter missing")
        return default
    value = params[key]
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"{where}.{key}: expected an integer, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParseError(f"{where}.{key}: expected a finite number, got {value!r}")
    return float(value)


def _random_spd(dim: int, ridge: float, seed: int, index: int) -> np.ndarray:
    a = _rng.stream(seed, "family/random_spd", index).standard_normal((dim, dim))
    return a @ a.T / dim + ridge * np.eye(dim)


def ar1_matrix(dim: int, rho: float, scale: float = 1.0) -> np.ndarray:
    idx = np.arange(dim)
    return scale * rho ** np.abs(idx[:, None] - idx[None, :])


def family_pair(name: str, params: dict, seed: int = 0) -> GaussianPair:
    """Seeded pair from a named family.

    scaled      dim, c > 0, base in {"identity", "random"} (default identity)
    diagonal    d0, d1 lists; or dim with low, high > 0 (log-uniform draws)
    ar1         dim, rho0, rho1 with |rho| < 1; scale0, scale1 > 0 (default 1)
    random_spd  dim, ridge > 0 (default 0.5); Sigma = A A^T / dim + ridge I
    """
    where = f"family[{name}]"
    if not isinstance(params, dict):
        raise ParseError(f"{where}.params: expected an object")
    if name == "scaled":
        dim = _param(params, "dim", where, kind=int)
        c = _param(params, "c", where)
        if c <= 0:
            raise ParseError(f"{where}.c: scale factor must be > 0")
        base = params.get("base", "identity")
        if base == "identity":
            s0 = np.eye(dim)
        elif base == "random":
            s0 = _random_spd(dim, _param(params, "ridge", where, 0.5), seed, 0)
        else:
            raise ParseError(f"{where}.base: expected 'identity' or 'random', got {base!r}")
        return GaussianPair(validate_spd(s0), validate_spd(c * s0))
    if name == "diagonal":
        if "d0" in params or "d1" in params:
            d0 = np.asarray(params.get("d0"), dtype=float)
            d1 = np.asarray(params.get("d1"), dtype=float)
            if d0.ndim != 1 or d0.shape != d1.shape or d0.size == 0:
                raise ParseError(f"{where}: d0 and d1 must be non-empty lists of equal length")
        else:
            dim = _param(params, "dim", where, kind=int)
            lo, hi = _param(params, "low", where, 0.5), _param(params, "high", where, 2.0)
            if not 0 < lo <= hi:
                raise ParseError(f"{where}: need 0 < low <= high")
            g = _rng.stream(seed, "family/diagonal")
            d0, d1 = np.exp(g.uniform(math.log(lo), math.log(hi), size=(2, dim)))
        return GaussianPair(validate_spd(np.diag(d0)), validate_spd(np.diag(d1)))
    if name == "ar1":
        dim = _param(params, "dim", where, kind=int)
        rho0, rho1 = _param(params, "rho0", where), _param(params, "rho1", where)
        sc0, sc1 = _param(params, "scale0", where, 1.0), _param(params, "scale1", where, 1.0)
        for key, r in (("rho0", rho0), ("rho1", rho1)):
            if not abs(r) < 1:
                raise ParseError(f"{where}.{key}: correlation must satisfy |rho| < 1")
        if sc0 <= 0 or sc1 <= 0:
            raise ParseError(f"{where}: scale factors must be > 0")
        return GaussianPair(validate_spd(ar1_matrix(dim, rho0, sc0)), validate_spd(ar1_matrix(dim, rho1, sc1)))
    if name == "random_spd":
        dim = _param(params, "dim", where, kind=int)
        ridge = _param(params, "ridge", where, 0.5)
        if ridge <= 0:
            raise ParseError(f"{where}.ridge: must be > 0")
        return GaussianPair(validate_spd(_random_spd(dim, ridge, seed, 0)), validate_spd(_random_spd(dim, ridge, seed, 1)))
    raise ParseError(f"family.name: unknown family {name!r}; choose from {', '.join(FAMILIES)}")


def parse_document(doc: Any) -> GaussianPair:
    """Pair described by an input document; a single ``sigma`` becomes (sigma, sigma)."""
    if not isinstance(doc, dict):
        raise ParseError("top level: expected a JSON object")
    keys = [k for k in ("pair", "sigma", "family") if k in doc]
    if len(keys) != 1:
        raise ParseError("top level: expected exactly one of 'pair', 'sigma', 'family'")
    key = keys[0]
    block = doc[key]
    if not isinstance(block, dict):
        raise ParseError(f"{key}: expected an object")
    if key == "pair":
        dim = _dim(block, "pair")
        for field in ("sigma0", "sigma1"):
            if field not in block:
                raise ParseError(f"pair.{field}: missing")
        s0 = _wrap(_matrix(block["sigma0"], dim, "pair.sigma0"), "pair.sigma0")
        s1 = _wrap(_matrix(block["sigma1"], dim, "pair.sigma1"), "pair.sigma1")
        return GaussianPair(s0, s1)
    if key == "sigma":
        dim = _dim(block, "sigma")
        if "entries" not in block:
            raise ParseError("sigma.entries: missing")
        s = _wrap(_matrix(block["entries"], dim, "sigma.entries"), "sigma.entries")
        return GaussianPair(s, s)
    name = block.get("name")
    seed = block.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ParseError(f"family.seed: expected a nonnegative integer, got {seed!r}")
    return family_pair(name, block.get("params", {}), seed)


def _wrap(arr: np.ndarray, where: str) -> SpdMatrix:
    try:
        return validate_spd(arr)
    except InputError as exc:
        raise type(exc)(f"{where}: {exc}") from None


def load_text(text: str) -> GaussianPair:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_document(doc)
