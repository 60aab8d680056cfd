"""Element matrices by Gauss-Legendre quadrature and global band assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisConstants, Mesh, centered_profile
from .linalg import BandedMatrix

BANDWIDTH = 3
DEFAULT_QUAD_ORDER = 10


def gauss_legendre(order: int):
    """Nodes and weights of the ``order``-point rule on ``[-1, 1]``."""
    if int(order) != order or not 1 <= order <= 30:
        raise ValueError(f"quadrature order must be an integer in 1..30, got {order}")
    return np.polynomial.legendre.leggauss(int(order))


@dataclass(frozen=True)
class ElementMatrices:
    """Integrals over one element ``[x_m, x_{m+1}]``.

    Row ``j`` is the weight function ``phi_{m-1+j}``, column ``i`` the
    trial function ``phi_{m-1+i}``.
    """

    mass: np.ndarray
    advection: np.ndarray
    diffusion: np.ndarray


def element_basis_table(constants: BasisConstants, r, deriv: int) -> np.ndarray:
    """Values of the four element shape functions at local offsets ``r``
    (``r = x - x_m``), shape ``(4, len(r))``."""
    r = np.asarray(r, dtype=float)
    h = constants.h
    return np.stack([centered_profile(constants, r - (j - 1) * h, deriv) for j in range(4)])


def reference_element_matrices(
    constants: BasisConstants, quad_order: int = DEFAULT_QUAD_ORDER
) -> ElementMatrices:
    if quad_order < 8:
        raise ValueError(f"quad_order must be at least 8, got {quad_order}")
    nodes, weights = gauss_legendre(quad_order)
    h = constants.h
    # exponentials steepen with p*h; split the element so each panel sees at most e^2
    panels = max(1, math.ceil(constants.ph / 2.0))
    width = h / panels
    starts = width * np.arange(panels)
    r = (starts[:, None] + 0.5 * width * (nodes + 1.0)).ravel()
    w = np.tile(0.5 * width * weights, panels)
    phi = element_basis_table(constants, r, 0)
    dphi = element_basis_table(constants, r, 1)
    d2phi = element_basis_table(constants, r, 2)
    weighted = phi * w
    mass = weighted @ phi.T
    return ElementMatrices(
        mass=0.5 * (mass + mass.T),
        advection=weighted @ dphi.T,
        diffusion=weighted @ d2phi.T,
    )


def _scatter(n_elements: int, elem: np.ndarray) -> BandedMatrix:
    # element m owns global rows/cols m..m+3 (basis indices m-1..m+2)
    out = BandedMatrix.zeros(n_elements + 3, BANDWIDTH)
    for r in range(4):
        for c in range(4):
            out.data[BANDWIDTH + r - c, c : c + n_elements] += elem[r, c]
    return out


def assemble_global(mesh: Mesh, elem: ElementMatrices):
    """Global mass, advection and diffusion matrices of size ``(N+3)``,
    indexed by basis number ``-1..N+1`` (offset by one)."""
    if mesh.n < 3:
        raise ValueError(f"assembly needs at least 3 elements, got {mesh.n}")
    return (
        _scatter(mesh.n, elem.mass),
        _scatter(mesh.n, elem.advection),
        _scatter(mesh.n, elem.diffusion),
    )
