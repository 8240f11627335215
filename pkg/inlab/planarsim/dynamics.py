"""Kinematics and equations of motion of the planar tree.

Generalized coordinates q = [x, z, pitch, theta_1 .. theta_n]. For a floating
base, (x, z) is the position of the whole-body centre of mass, so the first two
rows of the mass matrix decouple (M[0:2, 0:2] = m_total * I, zero elsewhere) and
linear momentum changes only through external forces. For a pinned base, (x, z)
is the trunk position and the base coordinates are locked.

Every point is tracked with its position, Jacobian and velocity-product
acceleration ("bias"), so that for a point p:

    p_dot  = J v
    p_ddot = J v_dot + bias
"""
from __future__ import annotations

import numpy as np

from .model import RobotModel


def rotate(angle: float, r: np.ndarray) -> np.ndarray:
    """Rotate a planar (x, z) vector by angle about +y."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([c * r[0] + s * r[1], -s * r[0] + c * r[1]])


def _perp(w: np.ndarray) -> np.ndarray:
    # d/dangle of rotate(angle, r)
    return np.array([w[1], -w[0]])


class ChainKinematics:
    """Positions, Jacobians and bias accelerations of every link for one (q, v)."""

    def __init__(self, model: RobotModel, q: np.ndarray, v: np.ndarray):
        self.model = model
        self.q = q
        self.v = v
        n_links, ndof = len(model.links), model.dof

        self.angle = np.zeros(n_links)
        self.angle_rate = np.zeros(n_links)
        self.angle_jac = np.zeros((n_links, ndof))
        self.origin = np.zeros((n_links, 2))
        self.origin_jac = np.zeros((n_links, 2, ndof))
        self.origin_bias = np.zeros((n_links, 2))

        # trunk frame sits at the relative origin
        self.angle[0] = q[2]
        self.angle_jac[0, 2] = 1.0
        self.angle_rate[0] = v[2]
        for index, joint in enumerate(model.joints):
            k, p = joint.child_link, joint.parent_link
            w = rotate(self.angle[p], model.links[k].anchor)
            self.origin[k] = self.origin[p] + w
            self.origin_jac[k] = self.origin_jac[p] + np.outer(_perp(w), self.angle_jac[p])
            self.origin_bias[k] = self.origin_bias[p] - self.angle_rate[p] ** 2 * w
            self.angle[k] = self.angle[p] + q[3 + index]
            self.angle_jac[k] = self.angle_jac[p]
            self.angle_jac[k, 3 + index] += 1.0
            self.angle_rate[k] = self.angle_jac[k] @ v

        # link centres of mass relative to the trunk origin
        self.com_pos = np.zeros((n_links, 2))
        self.com_jac = np.zeros((n_links, 2, ndof))
        self.com_bias = np.zeros((n_links, 2))
        for k, link in enumerate(model.links):
            self.com_pos[k], self.com_jac[k], self.com_bias[k] = self._relative_point(k, link.com)

        if model.fixed_base:
            self.shift = np.zeros(2)
            self.shift_jac = np.zeros((2, ndof))
            self.shift_bias = np.zeros(2)
        else:
            weights = model.masses / model.total_mass
            self.shift = weights @ self.com_pos
            self.shift_jac = np.tensordot(weights, self.com_jac, axes=1)
            self.shift_bias = weights @ self.com_bias

        self._base_jac = np.zeros((2, ndof))
        self._base_jac[0, 0] = 1.0
        self._base_jac[1, 1] = 1.0

        self.link_pos = q[:2] + self.com_pos - self.shift
        self.link_jac = self._base_jac + self.com_jac - self.shift_jac
        self.link_bias = self.com_bias - self.shift_bias

    def _relative_point(self, link: int, local: np.ndarray):
        w = rotate(self.angle[link], local)
        pos = self.origin[link] + w
        jac = self.origin_jac[link] + np.outer(_perp(w), self.angle_jac[link])
        bias = self.origin_bias[link] - self.angle_rate[link] ** 2 * w
        return pos, jac, bias

    def point(self, link: int, local: np.ndarray):
        """World position, Jacobian and bias acceleration of a point fixed on a link."""
        pos, jac, bias = self._relative_point(link, local)
        return (
            self.q[:2] + pos - self.shift,
            self._base_jac + jac - self.shift_jac,
            bias - self.shift_bias,
        )

    def mass_matrix(self) -> np.ndarray:
        m = self.model.masses
        inertia = np.array([link.inertia for link in self.model.links])
        M = np.einsum("k,kai,kaj->ij", m, self.link_jac, self.link_jac)
        M += np.einsum("k,ki,kj->ij", inertia, self.angle_jac, self.angle_jac)
        return 0.5 * (M + M.T)

    def velocity_product_force(self) -> np.ndarray:
        """c(q, v): generalized Coriolis/centrifugal force to subtract from the right-hand side."""
        return np.einsum("k,kai,ka->i", self.model.masses, self.link_jac, self.link_bias)

    def gravity_force(self, gravity: float) -> np.ndarray:
        g = np.array([0.0, -gravity])
        return np.einsum("k,kai,a->i", self.model.masses, self.link_jac, g)

    def potential_energy(self, gravity: float) -> float:
        return float(gravity * self.model.masses @ self.link_pos[:, 1])

    def kinetic_energy(self) -> float:
        return float(0.5 * self.v @ self.mass_matrix() @ self.v)

    def linear_momentum(self) -> np.ndarray:
        """Total linear momentum (x, z) of the robot."""
        return np.einsum("k,kai,i->a", self.model.masses, self.link_jac, self.v)
