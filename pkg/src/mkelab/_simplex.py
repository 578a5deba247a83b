"""Transportation simplex (MODI / stepping-stone) on a dense cost matrix.

The basis is a spanning tree over the ``n + m`` row/column nodes. Rows are
nodes ``0..n-1``, columns ``n..n+m-1``. Dantzig pricing is used until a run
of degenerate pivots appears, then Bland's rule takes over until a pivot
makes progress, which rules out cycling.
"""

from collections import deque

import numpy as np


class SolverError(RuntimeError):
    """Raised when an exact solver fails to reach optimality."""


def _northwest_corner(a, b):
    n, m = len(a), len(b)
    ra, rb = a.astype(float).copy(), b.astype(float).copy()
    plan = np.zeros((n, m))
    basis = []
    i = j = 0
    while True:
        q = min(ra[i], rb[j])
        plan[i, j] = q
        basis.append((i, j))
        ra[i] -= q
        rb[j] -= q
        if i == n - 1 and j == m - 1:
            break
        if i == n - 1:
            j += 1
        elif j == m - 1:
            i += 1
        elif ra[i] <= rb[j]:
            i += 1
        else:
            j += 1
    return plan, basis


def _potentials(C, adj, n, m):
    u = np.zeros(n)
    v = np.zeros(m)
    seen = np.zeros(n + m, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nb in adj[node]:
            if seen[nb]:
                continue
            seen[nb] = True
            if node < n:
                v[nb - n] = C[node, nb - n] - u[node]
            else:
                u[nb] = C[nb, node - n] - v[node - n]
            queue.append(nb)
    if not seen.all():
        raise SolverError("basis is not a spanning tree")
    return u, v


def _tree_path(adj, src, dst, n_nodes):
    parent = np.full(n_nodes, -1)
    parent[src] = src
    queue = deque([src])
    while queue:
        node = queue.popleft()
        if node == dst:
            break
        for nb in adj[node]:
            if parent[nb] < 0:
                parent[nb] = node
                queue.append(nb)
    path = [dst]
    while path[-1] != src:
        path.append(int(parent[path[-1]]))
    return path[::-1]


def transport_simplex(a, b, C, max_iter=None, tol=None):
    """Solve ``min <C, P>`` over couplings of ``a`` and ``b``.

    Returns
    -------
    plan : ndarray, shape (n, m)
    u, v : ndarray
        Row and column potentials with ``u[0] = 0``, tight on every basic
        cell and feasible (up to ``tol``) everywhere else.
    n_iter : int
    """
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    if tol is None:
        tol = 1e-12 * (1.0 + np.abs(C).max())
    if max_iter is None:
        max_iter = 50 * n * m + 1000

    plan, basis = _northwest_corner(np.asarray(a), np.asarray(b))
    adj = [set() for _ in range(n + m)]
    for i, j in basis:
        adj[i].add(n + j)
        adj[n + j].add(i)

    degenerate_run = 0
    bland = False
    for it in range(max_iter):
        u, v = _potentials(C, adj, n, m)
        reduced = C - u[:, None] - v[None, :]
        if bland:
            neg = np.flatnonzero(reduced.ravel() < -tol)
            if neg.size == 0:
                return plan, u, v, it
            flat = int(neg[0])
        else:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                return plan, u, v, it
        ei, ej = divmod(flat, m)

        path = _tree_path(adj, ei, n + ej, n + m)
        # edges along the path alternate -, +, -, ... starting and ending with -
        minus, plus = [], []
        for k in range(len(path) - 1):
            p, q = path[k], path[k + 1]
            cell = (p, q - n) if p < n else (q, p - n)
            (minus if k % 2 == 0 else plus).append(cell)
        masses = np.array([plan[c] for c in minus])
        theta = masses.min()
        cands = [c for c, w in zip(minus, masses) if w == theta]
        leave = min(cands, key=lambda c: c[0] * m + c[1])

        for c in minus:
            plan[c] -= theta
        for c in plus:
            plan[c] += theta
        plan[ei, ej] += theta
        plan[leave] = 0.0
        np.maximum(plan, 0.0, out=plan)

        li, lj = leave
        adj[li].discard(n + lj)
        adj[n + lj].discard(li)
        adj[ei].add(n + ej)
        adj[n + ej].add(ei)

        if theta <= 0.0:
            degenerate_run += 1
            if degenerate_run > 2 * (n + m):
                bland = True
        else:
            degenerate_run = 0
            bland = False
    raise SolverError(
        f"transportation simplex did not converge in {max_iter} pivots ({n}x{m} instance)"
    )
