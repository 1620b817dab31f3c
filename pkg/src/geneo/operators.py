"""IENEO kernels: synthesis from parameters, convolution, and combinators.

Kernels are radial Gaussian mixtures normalized by the discrete L1 norm, so
non-expansivity in the sup norm is an algebraic identity.  Convolution is
plain cross-correlation with zero padding (no kernel flip; irrelevant for
radial stencils but fixed for determinism).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .core import GridFunction, IeneoParams, Kernel

DEFAULT_SUPPORTS = (7, 11, 21)


class DegenerateKernelError(ValueError):
    """Raised when a parameter point realizes an (almost) all-zero stencil."""


def default_components(support: int) -> int:
    """Number of Gaussian components for a stencil side: round-half-up of s/2+1."""
    return int(math.floor(support / 2.0 + 1.0 + 0.5))


def make_kernel(p: IeneoParams) -> Kernel:
    """Realize the discrete stencil of a parameter point.

    Raw value at offset (dx, dy): sum_i a_i exp(-(r - tau_i * r_max)^2 / (2 sigma^2))
    with r = hypot(dx, dy) and r_max = (s-1)/2; weights are raw / sum|raw|.
    """
    s = p.support
    r_max = (s - 1) / 2.0
    ax = np.arange(s) - r_max
    r = np.hypot(ax[:, None], ax[None, :])
    raw = np.zeros((s, s))
    for a_i, tau_i in zip(p.a, p.tau):
        raw += a_i * np.exp(-((r - tau_i * r_max) ** 2) / (2.0 * p.sigma**2))
    l1 = float(np.abs(raw).sum())
    if l1 < 1e-300:
        raise DegenerateKernelError("all-zero raw kernel for these parameters")
    return Kernel(raw / l1, l1)


def sample_params(
    seed: int,
    support: int,
    k: int | None = None,
    sigma_range: tuple[float, float] | None = None,
) -> IeneoParams:
    """Draw a random parameter point on the unit-sphere manifold.

    a and tau are spherically symmetric (normalized Gaussians), sigma uniform
    in `sigma_range` (default (0.5, s/4) pixels).  Deterministic per seed.
    """
    if k is None:
        k = default_components(support)
    if sigma_range is None:
        sigma_range = (0.5, support / 4.0)
    lo, hi = sigma_range
    if not (hi >= lo and lo > 0):
        raise ValueError("empty sigma_range")
    rng = np.random.default_rng(seed)
    while True:
        a = rng.standard_normal(k)
        tau = rng.standard_normal(k)
        na, nt = np.linalg.norm(a), np.linalg.norm(tau)
        if na > 1e-12 and nt > 1e-12:
            break
    sigma = float(rng.uniform(lo, hi))
    return IeneoParams(tuple(a / na), tuple(tau / nt), sigma, support)


def sample_operator(seed: int, support: int, k=None, sigma_range=None, max_tries: int = 64):
    """Sample parameters and realize the kernel, retrying degenerate draws."""
    for attempt in range(max_tries):
        p = sample_params(seed + attempt * 0x9E3779B9, support, k, sigma_range)
        try:
            return p, make_kernel(p)
        except DegenerateKernelError:
            continue
    raise DegenerateKernelError("could not realize a kernel in max_tries draws")


def apply(kernel: Kernel, f: GridFunction) -> GridFunction:
    """Cross-correlate with zero padding; output has the input's size."""
    h, w = f.values.shape
    if kernel.side > h or kernel.side > w:
        raise ValueError("kernel larger than image")
    out = ndimage.correlate(f.values, kernel.weights, mode="constant", cval=0.0)
    return GridFunction(out)


class KernelOperator:
    """A realized IENEO: callable GridFunction -> GridFunction."""

    def __init__(self, kernel: Kernel):
        self.kernel = kernel

    def __call__(self, f: GridFunction) -> GridFunction:
        return apply(self.kernel, f)


class ConvexCombination:
    """Weighted sum of kernel operators with sum|coeffs| <= 1.

    Non-expansive by construction: each term is, and the coefficient mass is
    at most one.
    """

    def __init__(self, kernels: list[Kernel], coeffs: list[float]):
        if len(kernels) != len(coeffs) or not kernels:
            raise ValueError("kernels and coeffs must be non-empty and equal length")
        if sum(abs(c) for c in coeffs) > 1.0 + 1e-12:
            raise ValueError("sum of |coeffs| must be <= 1")
        self.kernels = list(kernels)
        self.coeffs = [float(c) for c in coeffs]

    def __call__(self, f: GridFunction) -> GridFunction:
        acc = np.zeros_like(f.values)
        for k, c in zip(self.kernels, self.coeffs):
            acc = acc + c * apply(k, f).values
        return GridFunction(acc)


def convex_combine(kernels: list[Kernel], coeffs: list[float]) -> ConvexCombination:
    return ConvexCombination(kernels, coeffs)


class Composite:
    """f -> outer(inner(f)); preserves non-expansivity and equivariance."""

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner

    def __call__(self, f: GridFunction) -> GridFunction:
        return self.outer(self.inner(f))


def compose(outer, inner) -> Composite:
    return Composite(outer, inner)
