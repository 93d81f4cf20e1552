"""LSI-MDP data model: joint kernel, stage cost, discount and initial laws.

The state is a pair ``(x_o, x_u)``. Only ``x_o`` is seen by the controller.
Arrays are stored dense with the axis order

* ``kernel[a, x_o, x_u, x_o_next, x_u_next]``
* ``cost[a, x_o, x_u]``
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .errors import ModelError

STOCH_TOL = 1e-9

_FIELDS = {"n_obs", "n_unobs", "n_actions", "discount", "alpha_obs", "alpha_unobs", "cost"}
_KERNEL_FIELDS = {"kernel", "factored"}


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FactoredKernel:
    """Kernel of the form ``p_obs[a, x_o, x_o'] * p_unobs[a, x_u, x_u']``."""

    p_obs: np.ndarray
    p_unobs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_obs", _frozen(self.p_obs))
        object.__setattr__(self, "p_unobs", _frozen(self.p_unobs))
        for name in ("p_obs", "p_unobs"):
            p = getattr(self, name)
            if p.ndim != 3 or p.shape[1] != p.shape[2]:
                raise ModelError(f"{name} must have shape [a][n][n], got {p.shape}")
            _check_rows(p, name)
        if self.p_obs.shape[0] != self.p_unobs.shape[0]:
            raise ModelError("p_obs and p_unobs disagree on the number of actions")

    def joint(self):
        """Expand to the dense joint kernel."""
        return np.einsum("aij,akl->aikjl", self.p_obs, self.p_unobs)


def _check_rows(p, name):
    if not np.all(np.isfinite(p)):
        raise ModelError(f"{name} has non-finite entries")
    if np.any(p < 0) or np.any(p > 1):
        raise ModelError(f"{name} has entries outside [0, 1]")
    sums = p.sum(axis=-1)
    bad = np.argwhere(np.abs(sums - 1.0) > STOCH_TOL)
    if len(bad):
        idx = tuple(int(i) for i in bad[0])
        raise ModelError(f"{name} row {idx} sums to {float(sums[idx]):.12g}, expected 1", row=idx)


def _check_distribution(vec, name, n):
    if vec.shape != (n,):
        raise ModelError(f"{name} must have length {n}, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)) or np.any(vec < 0):
        raise ModelError(f"{name} must be finite and nonnegative")
    if abs(vec.sum() - 1.0) > STOCH_TOL:
        raise ModelError(f"{name} sums to {float(vec.sum()):.12g}, expected 1")


@dataclass(frozen=True, eq=False)
class LsiModel:
    """A finite discounted-cost MDP whose state splits into observed and hidden parts.

    Construct directly from a joint kernel or with :meth:`from_factors`.
    All arrays are copied and made read-only.
    """

    kernel: np.ndarray
    cost: np.ndarray
    discount: float
    alpha_obs: np.ndarray
    alpha_unobs: np.ndarray
    factors: Optional[FactoredKernel] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("kernel", "cost", "alpha_obs", "alpha_unobs"):
            try:
                object.__setattr__(self, name, _frozen(getattr(self, name)))
            except (TypeError, ValueError) as exc:
                raise ModelError(f"{name} is not a rectangular numeric array: {exc}") from None
        k, c = self.kernel, self.cost
        if k.ndim != 5:
            raise ModelError(f"kernel must be 5-dimensional [a][x_o][x_u][x_o'][x_u'], got shape {k.shape}")
        n_a, n_o, n_u = k.shape[:3]
        if k.shape[3:] != (n_o, n_u):
            raise ModelError(f"kernel shape {k.shape} is not [a][x_o][x_u][x_o][x_u]")
        if c.shape != (n_a, n_o, n_u):
            raise ModelError(f"cost shape {c.shape} does not match kernel (expected {(n_a, n_o, n_u)})")
        flat = k.reshape(n_a, n_o, n_u, n_o * n_u)
        _check_rows(flat, "kernel")
        if not np.all(np.isfinite(c)):
            raise ModelError("cost has non-finite entries")
        if np.any(c < 0):
            idx = tuple(int(i) for i in np.argwhere(c < 0)[0])
            raise ModelError(f"cost{list(idx)} is negative")
        d = float(self.discount)
        if not (0.0 <= d < 1.0):
            raise ModelError(f"discount {d!r} outside [0, 1)")
        object.__setattr__(self, "discount", d)
        _check_distribution(self.alpha_obs, "alpha_obs", n_o)
        _check_distribution(self.alpha_unobs, "alpha_unobs", n_u)
        if self.factors is not None and self.factors.p_obs.shape[0] != n_a:
            raise ModelError("factors disagree with kernel on the number of actions")

    def __eq__(self, other):
        if not isinstance(other, LsiModel):
            return NotImplemented
        return self.discount == other.discount and all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("kernel", "cost", "alpha_obs", "alpha_unobs")
        )

    __hash__ = None

    @classmethod
    def from_factors(cls, p_obs, p_unobs, cost, discount, alpha_obs, alpha_unobs):
        fk = FactoredKernel(p_obs, p_unobs)
        return cls(fk.joint(), cost, discount, alpha_obs, alpha_unobs, factors=fk)

    @property
    def n_actions(self):
        return self.kernel.shape[0]

    @property
    def n_obs(self):
        return self.kernel.shape[1]

    @property
    def n_unobs(self):
        return self.kernel.shape[2]

    @property
    def c_max(self):
        return float(self.cost.max()) if self.cost.size else 0.0

    @property
    def value_cap(self):
        """Upper bound ``c_max / (1 - beta)`` on every discounted value."""
        return self.c_max / (1.0 - self.discount)

    def obs_marginal(self):
        """``p(x_o' | x_o, x_u, a)`` as an array ``[a, x_o, x_u, x_o']``."""
        return self.kernel.sum(axis=4)

    def to_dict(self, factored=None):
        """JSON-ready dict. ``factored=None`` writes factors when the model has them."""
        use_factors = self.factors is not None if factored is None else factored
        d = {
            "n_obs": self.n_obs,
            "n_unobs": self.n_unobs,
            "n_actions": self.n_actions,
            "discount": self.discount,
            "alpha_obs": self.alpha_obs.tolist(),
            "alpha_unobs": self.alpha_unobs.tolist(),
            "cost": self.cost.tolist(),
        }
        if use_factors:
            if self.factors is None:
                raise ModelError("model has no stored factors")
            d["factored"] = {"p_obs": self.factors.p_obs.tolist(), "p_unobs": self.factors.p_unobs.tolist()}
        else:
            d["kernel"] = self.kernel.tolist()
        return d


def model_from_dict(data):
    """Validate a decoded model document and build an :class:`LsiModel`."""
    if not isinstance(data, dict):
        raise ModelError("model document must be a JSON object")
    keys = set(data)
    unknown = keys - _FIELDS - _KERNEL_FIELDS
    if unknown:
        raise ModelError(f"unknown fields: {sorted(unknown)}")
    missing = _FIELDS - keys
    if missing:
        raise ModelError(f"missing fields: {sorted(missing)}")
    present = keys & _KERNEL_FIELDS
    if len(present) != 1:
        raise ModelError("exactly one of 'kernel' or 'factored' is required")
    dims = {}
    for name in ("n_obs", "n_unobs", "n_actions"):
        v = data[name]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ModelError(f"{name} must be a positive integer")
        dims[name] = v
    n_o, n_u, n_a = dims["n_obs"], dims["n_unobs"], dims["n_actions"]

    def arr(value, name, shape):
        try:
            a = np.array(value, dtype=float)
        except (TypeError, ValueError):
            raise ModelError(f"{name} is not a rectangular numeric array") from None
        if a.shape != shape:
            raise ModelError(f"{name} has shape {a.shape}, expected {shape}")
        return a

    if not isinstance(data["discount"], (int, float)) or isinstance(data["discount"], bool):
        raise ModelError("discount must be a number")
    cost = arr(data["cost"], "cost", (n_a, n_o, n_u))
    alpha_obs = arr(data["alpha_obs"], "alpha_obs", (n_o,))
    alpha_unobs = arr(data["alpha_unobs"], "alpha_unobs", (n_u,))
    if "factored" in data:
        f = data["factored"]
        if not isinstance(f, dict) or set(f) != {"p_obs", "p_unobs"}:
            raise ModelError("'factored' must be an object with exactly 'p_obs' and 'p_unobs'")
        p_obs = arr(f["p_obs"], "factored.p_obs", (n_a, n_o, n_o))
        p_unobs = arr(f["p_unobs"], "factored.p_unobs", (n_a, n_u, n_u))
        return LsiModel.from_factors(p_obs, p_unobs, cost, data["discount"], alpha_obs, alpha_unobs)
    kernel = arr(data["kernel"], "kernel", (n_a, n_o, n_u, n_o, n_u))
    return LsiModel(kernel, cost, data["discount"], alpha_obs, alpha_unobs)


def load_model(path):
    """Read and validate a model file (JSON)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"parse error in {path}: {exc}") from None
    return model_from_dict(data)


def save_model(model, path, factored=None):
    """Write ``model`` as JSON. Floats are written with round-trip precision."""
    text = json.dumps(model.to_dict(factored=factored), indent=1)
    atomic_write(path, text + "\n")


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def example_model():
    """The two-observed, two-hidden, two-action example shipped with the package."""
    with resources.files("lsimdp").joinpath("data/example_2x2x2.json").open(encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def check_factorization(model, tol=1e-9):
    """Return a :class:`FactoredKernel` reproducing ``model.kernel`` within ``tol``, else None.

    Candidate factors are marginals taken at the first conditioning index; they
    must be constant across the other conditioning variable within ``tol`` and
    their product must reconstruct the joint kernel within ``tol``.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    k = model.kernel
    obs_marg = k.sum(axis=4)  # [a, x_o, x_u, x_o']
    unobs_marg = k.sum(axis=3)  # [a, x_o, x_u, x_u']
    p_obs = obs_marg[:, :, 0, :]
    p_unobs = unobs_marg[:, 0, :, :]
    if np.max(np.abs(obs_marg - p_obs[:, :, None, :])) > tol:
        return None
    if np.max(np.abs(unobs_marg - p_unobs[:, None, :, :])) > tol:
        return None
    recon = np.einsum("aij,akl->aikjl", p_obs, p_unobs)
    if np.max(np.abs(recon - k)) > tol:
        return None
    # marginals of a stochastic kernel are stochastic up to rounding; renormalize
    p_obs = p_obs / p_obs.sum(axis=-1, keepdims=True)
    p_unobs = p_unobs / p_unobs.sum(axis=-1, keepdims=True)
    return FactoredKernel(p_obs, p_unobs)
