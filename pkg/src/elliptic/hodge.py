"""Gradient part of a vector field on the slab."""
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.linalg import eigh

from src.elliptic.slab import LayeredField3D, SlabGrid
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

Vector3 = Tuple[LayeredField3D, LayeredField3D, LayeredField3D]


class HodgeProjector:
    """
    Orthogonal projection onto discrete gradients in the slab inner product.

    The discrete gradient is G w = (D w, ik1 w, ik2 w) with D the
    second-order vertical difference and W the trapezoid weights. Solving
    the normal equations (D^T W D + |k|^2 W) w = G^T W v mode by mode gives
    the weak form of Delta w = div v with d_nu w = v . nu as the natural
    boundary condition. Components are ordered (z, x1, x2).
    """

    def __init__(self, slab: SlabGrid):
        self.slab = slab
        D = slab.derivative_matrix
        W = np.diag(slab.z_weights)
        self.D = D
        self.weights = slab.z_weights
        self.eigvals, self.eigvecs = eigh(D.T @ W @ D, W)
        torus = slab.torus
        self.kd2 = (np.abs(torus.ik1) ** 2 + np.abs(torus.ik2) ** 2).ravel()
        self.null_tol = 1e-12 * float(np.max(np.abs(self.eigvals)))
        logger.debug(f"HodgeProjector ready: nz={slab.nz}, smallest eigenvalue {self.eigvals[0]:.3e}")

    def potential_coeffs(self, v: Vector3) -> np.ndarray:
        """Coefficients of w, shape (nz, n, n)."""
        torus = self.slab.torus
        nz = self.slab.nz
        vz, v1, v2 = (c.coeffs for c in v)
        wts = self.weights[:, None, None]
        rhs = (np.tensordot(self.D.T, wts * vz, axes=(1, 0))
               - torus.ik1 * wts * v1 - torus.ik2 * wts * v2).reshape(nz, -1)

        denom = self.eigvals[:, None] + self.kd2[None, :]
        null = np.abs(denom) <= self.null_tol
        scale = np.zeros_like(denom)
        np.divide(1.0, denom, out=scale, where=~null)
        w = self.eigvecs @ (scale * (self.eigvecs.T @ rhs))
        return w.reshape(nz, torus.n, torus.n)

    def project(self, v: Vector3) -> Vector3:
        slab, torus = self.slab, self.slab.torus
        w = self.potential_coeffs(v)
        return (LayeredField3D.from_coeffs(slab, np.tensordot(self.D, w, axes=(1, 0))),
                LayeredField3D.from_coeffs(slab, torus.ik1 * w),
                LayeredField3D.from_coeffs(slab, torus.ik2 * w))


@lru_cache(maxsize=8)
def get_hodge_projector(slab: SlabGrid) -> HodgeProjector:
    return HodgeProjector(slab)


def hodge_project(v: Vector3) -> Vector3:
    """Gradient part grad w of v = grad w + curl u (components ordered z, x1, x2)."""
    return get_hodge_projector(v[0].slab).project(v)
