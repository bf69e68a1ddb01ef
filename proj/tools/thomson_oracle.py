#!/usr/bin/env python3
"""Multi-start projected-gradient oracle for Thomson energies on S^n.

Independent of the C++ library: points live directly on the sphere (no
stereographic chart), descent uses the analytic Coulomb gradient projected
onto the tangent space followed by renormalization, then an L-BFGS polish in
ambient coordinates with a normalization penalty-free retraction.

Usage: thomson_oracle.py [--n 2] [--nmin 2] [--nmax 12] [--starts 64]
Writes CSV rows "N,n,energy,starts,hits" to stdout.
"""
import argparse

import numpy as np
from scipy.optimize import minimize


def energy_and_grad(flat, N, dim):
    x = flat.reshape(N, dim)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    p = x / norms
    diff = p[:, None, :] - p[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    iu = np.triu_indices(N, 1)
    e = np.sum(1.0 / dist[iu])
    with np.errstate(divide="ignore"):
        inv3 = np.where(dist > 0, 1.0 / dist**3, 0.0)
    gp = -np.sum(diff * inv3[:, :, None], axis=1)
    # chain rule through p = x/|x|
    gx = (gp - np.sum(gp * p, axis=1, keepdims=True) * p) / norms
    return e, gx.ravel()


def projected_descent(p, iters=2000, step=0.05):
    N, dim = p.shape
    for _ in range(iters):
        _, g = energy_and_grad(p.ravel(), N, dim)
        g = g.reshape(N, dim)
        p = p - step * g
        p /= np.linalg.norm(p, axis=1, keepdims=True)
    return p


def solve(N, n, starts, rng):
    dim = n + 1
    best = np.inf
    values = []
    for _ in range(starts):
        p = rng.standard_normal((N, dim))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        p = projected_descent(p, iters=300, step=0.02)
        res = minimize(energy_and_grad, p.ravel(), args=(N, dim), jac=True,
                       method="L-BFGS-B", options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000})
        values.append(res.fun)
        best = min(best, res.fun)
    hits = sum(1 for v in values if v <= best + 1e-9)
    return best, hits


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--nmin", type=int, default=2)
    ap.add_argument("--nmax", type=int, default=12)
    ap.add_argument("--starts", type=int, default=64)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("N,n,energy,starts,hits")
    for N in range(args.nmin, args.nmax + 1):
        e, hits = solve(N, args.n, args.starts, rng)
        print(f"{N},{args.n},{e:.10f},{args.starts},{hits}")


if __name__ == "__main__":
    main()
