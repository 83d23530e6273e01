"""Boundary-fitted polar discretization of the graph functional on a disk (n = 1).

Unknowns sit at the center and on rings r_i = R sin(pi i / (2 Nr)), i < Nr,
with M equally spaced angles per ring; the ring i = Nr is the boundary where
u = 0. Between consecutive rings u is piecewise linear in the logical
(r, phi) plane; each logical quad is split along both diagonals with weight
1/2, which makes the scheme symmetric under phi -> -phi as well as under
rotation by one angular step. The integrand
sqrt(u_r^2 + (u_phi / r - r/2)^2) r is taken at triangle centroids. The
innermost disk is a fan of Cartesian P1 triangles around the center.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._reduce import tree_sum


@dataclass
class PolarMesh:
    Nr: int
    M: int
    R: float

    def __post_init__(self) -> None:
        Nr, M, R = self.Nr, self.M, self.R
        th = 0.5 * np.pi * np.arange(Nr + 1) / Nr
        rr = R * np.sin(th)
        rr[-1] = R
        self.rings = rr
        dphi = 2.0 * np.pi / M
        phi = dphi * np.arange(M)
        self.phi = phi
        nf = 1 + (Nr - 1) * M
        self.nfree = nf
        j = np.arange(M)

        def nid(i, jj):
            if i == 0:
                return np.zeros_like(jj)
            if i >= Nr:
                return np.full_like(jj, -1)
            return 1 + (i - 1) * M + (jj % M)

        rows_r, cols_r, vals_r, vals_p = [], [], [], []
        wts, rcs = [], []
        vol_idx, vol_val = [], []
        ntri = 0
        for i in range(1, Nr):
            a = (i, 0)
            b = (i + 1, 0)
            c = (i + 1, 1)
            d = (i, 1)
            for tri in ((a, b, c), (a, c, d), (a, b, d), (b, c, d)):
                (i0, o0), (i1, o1), (i2, o2) = tri
                r0, r1, r2 = rr[i0], rr[i1], rr[i2]
                p0, p1, p2 = o0 * dphi, o1 * dphi, o2 * dphi
                det = (r1 - r0) * (p2 - p0) - (r2 - r0) * (p1 - p0)
                area = 0.25 * abs(det)
                br = ((p1 - p2) / det, (p2 - p0) / det, (p0 - p1) / det)
                bp = ((r2 - r1) / det, (r0 - r2) / det, (r1 - r0) / det)
                rc = (r0 + r1 + r2) / 3.0
                sr = r0 + r1 + r2
                idx = ntri + j
                for (ii, oo), cr, cp, rv in zip(tri, br, bp, (r0, r1, r2)):
                    if ii >= Nr:
                        continue
                    nodes = nid(ii, j + oo)
                    rows_r.append(idx)
                    cols_r.append(nodes)
                    vals_r.append(np.full(M, cr))
                    vals_p.append(np.full(M, cp / rc))
                    # exact ∫ u r over the logical triangle for linear u and r
                    vol_idx.append(nodes)
                    vol_val.append(np.full(M, area / 12.0 * (sr + rv)))
                wts.append(np.full(M, area * rc))
                rcs.append(np.full(M, rc))
                ntri += M
        # center fan
        x1 = rr[1] * np.cos(phi)
        y1 = rr[1] * np.sin(phi)
        x2 = np.roll(x1, -1)
        y2 = np.roll(y1, -1)
        det = x1 * y2 - x2 * y1
        af = 0.5 * np.abs(det)
        fan_nodes = (np.zeros(M, int), nid(1, j), nid(1, j + 1))
        bx = ((y1 - y2) / det, y2 / det, -y1 / det)
        by = ((x2 - x1) / det, -x2 / det, x1 / det)
        fr = np.tile(np.arange(M), 3)
        fc = np.concatenate(fan_nodes)
        Fx = sp.csr_matrix((np.concatenate(bx), (fr, fc)), shape=(M, nf))
        Fy = sp.csr_matrix((np.concatenate(by), (fr, fc)), shape=(M, nf))
        r_idx = np.concatenate(rows_r)
        c_idx = np.concatenate(cols_r)
        Gr = sp.csr_matrix((np.concatenate(vals_r), (r_idx, c_idx)), shape=(ntri, nf))
        Gp = sp.csr_matrix((np.concatenate(vals_p), (r_idx, c_idx)), shape=(ntri, nf))
        rc_all = np.concatenate(rcs)
        xc = (x1 + x2) / 3.0
        yc = (y1 + y2) / 3.0
        # in logical cells the horizontal vector is (u_r, u_phi/r - r/2)
        self.Ga = sp.vstack([Gr, Fx]).tocsr()
        self.Gb = sp.vstack([Gp, Fy]).tocsr()
        self.ca = np.concatenate([np.zeros(ntri), 0.5 * yc])
        self.cb = np.concatenate([-0.5 * rc_all, -0.5 * xc])
        self.wt = np.concatenate([np.concatenate(wts), af])
        self.GaT = self.Ga.T.tocsr()
        self.GbT = self.Gb.T.tocsr()
        w = np.zeros(nf)
        np.add.at(w, np.concatenate(vol_idx), np.concatenate(vol_val))
        np.add.at(w, np.concatenate(fan_nodes), np.repeat(af / 3.0, 3))
        self.vol_w = w
        r_nodes = np.concatenate([[0.0], np.repeat(rr[1:Nr], M)])
        p_nodes = np.concatenate([[0.0], np.tile(phi, Nr - 1)])
        self.r = r_nodes
        self.x = r_nodes * np.cos(p_nodes)
        self.y = r_nodes * np.sin(p_nodes)

    # functionals -----------------------------------------------------------
    def horizontal(self, u: np.ndarray):
        return self.Ga @ u + self.ca, self.Gb @ u + self.cb

    def perimeter(self, u: np.ndarray) -> float:
        a, b = self.horizontal(u)
        return tree_sum(self.wt * np.hypot(a, b))

    def volume(self, u: np.ndarray) -> float:
        return tree_sum(self.vol_w * u)

    def energy(self, u: np.ndarray, lam: float) -> float:
        return self.perimeter(u) + lam * self.volume(u)

    def grad_hess(self, u: np.ndarray, lam: float, eps: float):
        """Gradient and a regularized Hessian.

        Per cell the Hessian of |v| is (I - n n^T)/|v|; adding eps n n^T/|v|
        keeps it positive definite. eps = 1 gives the lagged-diffusivity
        metric, eps -> 0 the Newton matrix.
        """
        a, b = self.horizontal(u)
        m = np.maximum(np.hypot(a, b), 1e-14)
        na = a / m
        nb = b / m
        g = self.GaT @ (self.wt * na) + self.GbT @ (self.wt * nb) + lam * self.vol_w
        ww = self.wt / m
        k = 1.0 - eps
        haa = sp.diags(ww * (1.0 - k * na * na))
        hbb = sp.diags(ww * (1.0 - k * nb * nb))
        hab = sp.diags(-ww * k * na * nb)
        H = (self.GaT @ haa @ self.Ga + self.GbT @ hbb @ self.Gb
             + self.GaT @ hab @ self.Gb + self.GbT @ hab @ self.Ga)
        return g, H.tocsc()

    # field helpers ---------------------------------------------------------
    def ring_matrix(self, u: np.ndarray) -> np.ndarray:
        """(Nr+1) x M array of node values with the center row and a zero boundary row."""
        out = np.zeros((self.Nr + 1, self.M))
        out[0] = u[0]
        out[1:self.Nr] = u[1:].reshape(self.Nr - 1, self.M)
        return out

    def circular_spread(self, u: np.ndarray) -> float:
        rings = u[1:].reshape(self.Nr - 1, self.M)
        return float(np.max(rings.max(axis=1) - rings.min(axis=1)))

    def prolong_to(self, u: np.ndarray, fine: PolarMesh) -> np.ndarray:
        """Linear interpolation in ring index and angle onto a finer mesh."""
        full = self.ring_matrix(u)
        ti = np.arange(fine.Nr + 1) * self.Nr / fine.Nr
        i0 = np.minimum(np.floor(ti).astype(int), self.Nr - 1)
        a = ti - i0
        A = (1 - a)[:, None] * full[i0] + a[:, None] * full[i0 + 1]
        pj = np.arange(fine.M) * self.M / fine.M
        j0 = np.floor(pj).astype(int)
        b = pj - j0
        B = (1 - b)[None, :] * A[:, j0 % self.M] + b[None, :] * A[:, (j0 + 1) % self.M]
        return np.concatenate([[B[0].mean()], B[1:fine.Nr].ravel()])

    def evaluate(self, u: np.ndarray, xq: np.ndarray, yq: np.ndarray) -> np.ndarray:
        """Interpolate node values (bilinear in ring index and angle) at points of the disk."""
        full = self.ring_matrix(u)
        r = np.hypot(xq, yq)
        th = np.arcsin(np.clip(r / self.R, 0.0, 1.0))
        s = th / (0.5 * np.pi) * self.Nr
        i0 = np.clip(np.floor(s).astype(int), 0, self.Nr - 1)
        a = s - i0
        ang = np.mod(np.arctan2(yq, xq), 2.0 * np.pi) / (2.0 * np.pi / self.M)
        j0 = np.floor(ang).astype(int) % self.M
        b = ang - np.floor(ang)
        j1 = (j0 + 1) % self.M
        lo = (1 - b) * full[i0, j0] + b * full[i0, j1]
        hi = (1 - b) * full[i0 + 1, j0] + b * full[i0 + 1, j1]
        return (1 - a) * lo + a * hi
