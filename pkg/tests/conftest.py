"""Shared oracle helpers: independent reference computations the tests
compare the library against. Nothing here calls back into the solver code
paths under test."""

from __future__ import annotations

import math

import numpy as np


def fd_gradient(f, theta, h=1e-6):
    """Central-difference gradient of a scalar function."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h * max(1.0, abs(theta[i]))
        grad[i] = (f(theta + step) - f(theta - step)) / (2.0 * step[i])
    return grad


def fd_jacobian(g, theta, h=1e-6):
    """Central-difference Jacobian of a vector function (Hessian when g is a
    gradient)."""
    theta = np.asarray(theta, dtype=np.float64)
    cols = []
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h * max(1.0, abs(theta[i]))
        cols.append((g(theta + step) - g(theta - step)) / (2.0 * step[i]))
    return np.stack(cols, axis=1)


def gauss_jordan_inverse(matrix):
    """Pure-python matrix inverse with partial pivoting; independent of
    numpy.linalg."""
    a = [list(map(float, row)) for row in np.asarray(matrix)]
    n = len(a)
    aug = [row + [1.0 if i == j else 0.0 for j in range(n)]
           for i, row in enumerate(a)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if abs(aug[pivot][col]) < 1e-300:
            raise ZeroDivisionError("singular matrix in oracle inverse")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        scale = aug[col][col]
        aug[col] = [v / scale for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0.0:
                factor = aug[r][col]
                aug[r] = [v - factor * w for v, w in zip(aug[r], aug[col])]
    return np.array([row[n:] for row in aug])


def gd_minimize(value_grad, theta0, grad_tol=1e-9, max_iters=200000):
    """Plain gradient descent with backtracking; a slow but solver-independent
    way to locate a smooth convex minimum."""
    theta = np.array(theta0, dtype=np.float64)
    step = 1.0
    value, grad = value_grad(theta)
    for _ in range(max_iters):
        if np.max(np.abs(grad)) <= grad_tol:
            return theta
        while True:
            candidate = theta - step * grad
            cand_value, cand_grad = value_grad(candidate)
            if np.isfinite(cand_value) and cand_value <= value - 0.5 * step * float(grad @ grad):
                break
            step *= 0.5
            if step < 1e-18:
                raise AssertionError("oracle gradient descent stalled")
        theta, value, grad = candidate, cand_value, cand_grad
        step *= 1.3
    raise AssertionError("oracle gradient descent did not converge")


def pure_python_logistic_gradient(x, y, theta):
    """Sample-order summation with math.exp, no numpy reductions."""
    n, d = x.shape
    total = [0.0] * d
    for i in range(n):
        u = sum(float(x[i, j]) * float(theta[j]) for j in range(d))
        if u >= 0:
            p = 1.0 / (1.0 + math.exp(-u))
        else:
            e = math.exp(u)
            p = e / (1.0 + e)
        r = p - float(y[i])
        for j in range(d):
            total[j] += r * float(x[i, j])
    return np.array([t / n for t in total])


def enumerate_lasso_d3(x, y, lam):
    """Exact lasso solution for d=3 by sign-pattern enumeration.

    The smooth part is the unhalved mean squared error. For each sign vector
    in {-1,0,1}^3 solve the stationarity system on the claimed support and
    keep candidates whose signs and off-support subgradients are consistent;
    the best objective among consistent candidates is the global optimum.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = x.shape
    assert d == 3
    gram = 2.0 * (x.T @ x) / n
    lin = 2.0 * (x.T @ y) / n

    def objective(theta):
        r = y - x @ theta
        return float(np.mean(r * r)) + lam * float(np.abs(theta).sum())

    best_theta, best_value = None, math.inf
    signs = (-1, 0, 1)
    for s0 in signs:
        for s1 in signs:
            for s2 in signs:
                sign = np.array([s0, s1, s2], dtype=np.float64)
                support = np.flatnonzero(sign)
                theta = np.zeros(3)
                if support.size:
                    sub = gram[np.ix_(support, support)]
                    rhs = lin[support] - lam * sign[support]
                    try:
                        theta[support] = np.linalg.solve(sub, rhs)
                    except np.linalg.LinAlgError:
                        continue
                    if np.any(np.sign(theta[support]) != sign[support]):
                        continue
                grad = gram @ theta - lin
                off = np.setdiff1d(np.arange(3), support)
                if np.any(np.abs(grad[off]) > lam + 1e-9):
                    continue
                value = objective(theta)
                if value < best_value:
                    best_theta, best_value = theta, value
    assert best_theta is not None
    return best_theta, best_value
