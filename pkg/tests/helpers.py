"""Shared generators and independent oracles for the test suite.

Everything here recomputes quantities from first principles (plain sums over
expanded tables, full-joint enumeration, survival-configuration sweeps) so
that library code is never checked against itself.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from doeblin import BayesNet, Node

# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def random_pmf(rng, m, alpha=1.0):
    return rng.dirichlet(np.full(m, alpha))


def random_channel(rng, n, m, alpha=1.0):
    return np.stack([random_pmf(rng, m, alpha) for _ in range(n)])


def random_positive_channel(rng, n, m):
    W = random_channel(rng, n, m) + 0.05
    return W / W.sum(axis=1, keepdims=True)


def max2_of(mats: np.ndarray) -> float:
    return float(np.sort(mats, axis=0)[-2, :].sum())


def feasible_minimal_instance(rng, n, m):
    """PMFs with column-second-largest total at most one.

    For m >= n, rejection-sample peaked-at-distinct-symbols rows.  For
    n > m the condition has empty interior (whenever some row is never a
    column argmax the second-largest total is at least one), so those cells
    use exact-boundary constructions.
    """
    if n == 2:
        return np.stack([random_pmf(rng, m) for _ in range(n)])
    if m >= n:
        for sharp in (0.25, 0.15, 0.08, 0.04, 0.02, 0.0):
            peaks = rng.permutation(m)[:n]
            rows = []
            for i in range(n):
                base = np.zeros(m)
                base[peaks[i]] = 1.0
                rows.append((1.0 - sharp) * base + sharp * random_pmf(rng, m))
            mats = np.stack(rows)
            if max2_of(mats) <= 1.0:
                return mats
        raise AssertionError("sampler failed to hit the feasible region")
    if m == 2:
        # Second-largest total is 1 + (middle gap); tie the middle stats.
        heads = np.sort(rng.random(n))
        mid = heads[n // 2]
        heads[1:-1] = mid
        rows = np.stack([np.array([h, 1.0 - h]) for h in heads])
        return rng.permutation(rows)
    # n = 4, m = 3: disjoint indicator rows plus one arbitrary row sits
    # exactly on the boundary.
    rows = list(np.eye(m)[rng.permutation(m)])
    rows.append(random_pmf(rng, m))
    return rng.permutation(np.stack(rows))


def supercritical_trio(rng, m):
    """Three PMFs on m >= 3 symbols with column-second-largest total above one."""
    while True:
        delta = rng.uniform(1.0 - 1.0 / m + 0.05, 0.95)
        base = np.full((3, m), delta / (m - 1))
        for i in range(3):
            base[i, i % m] = 1.0 - delta
        noise = rng.dirichlet(np.ones(m), size=3)
        s = rng.uniform(0.0, 0.25)
        mats = (1.0 - s) * base + s * noise
        mats = mats[:, rng.permutation(m)]
        if max2_of(mats) > 1.0 + 1e-6:
            return mats


# ---------------------------------------------------------------------------
# Expanded-table oracles (plain dict arithmetic, no library calls)
# ---------------------------------------------------------------------------


def table_marginal(table: dict, coord: int, m: int) -> np.ndarray:
    out = np.zeros(m)
    for key, mass in table.items():
        out[key[coord]] += mass
    return out


def table_diag_mass(table: dict) -> float:
    return sum(mass for key, mass in table.items() if len(set(key)) == 1)


def table_union_mass(table: dict) -> float:
    return sum(mass * len(set(key)) for key, mass in table.items())


def table_intersection_mass(table: dict, coords) -> float:
    coords = tuple(coords)
    return sum(mass for key, mass in table.items() if len({key[c] for c in coords}) == 1)


def dobrushin_table(p: np.ndarray, q: np.ndarray) -> dict:
    """Closed-form two-marginal maximal coupling."""
    mn = np.minimum(p, q)
    c = float(mn.sum())
    table = {}
    for y, v in enumerate(mn):
        if v > 0:
            table[(y, y)] = float(v)
    if 1.0 - c > 1e-15:
        rp = (p - mn) / (1.0 - c)
        rq = (q - mn) / (1.0 - c)
        for y1, a in enumerate(rp):
            for y2, b in enumerate(rq):
                mass = (1.0 - c) * a * b
                if mass > 0:
                    table[(y1, y2)] = table.get((y1, y2), 0.0) + float(mass)
    return table


def mutual_information_nats(joint: np.ndarray) -> float:
    """I(X; Y) by direct summation, natural log."""
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    total = 0.0
    for x in range(joint.shape[0]):
        for y in range(joint.shape[1]):
            p = joint[x, y]
            if p > 0:
                total += p * math.log(p / (px[x] * py[y]))
    return total


# ---------------------------------------------------------------------------
# Bayesian-network oracles
# ---------------------------------------------------------------------------


def random_net(rng, max_nodes=6, max_alphabet=3, max_parents=2) -> BayesNet:
    n_nodes = int(rng.integers(2, max_nodes + 1))
    nodes = [Node("X", int(rng.integers(2, max_alphabet + 1)), (), None)]
    for i in range(1, n_nodes):
        k = int(rng.integers(2, max_alphabet + 1))
        n_par = int(rng.integers(1, min(i, max_parents) + 1))
        parents = tuple(sorted(rng.choice(i, size=n_par, replace=False).tolist()))
        rows = int(np.prod([nodes[p].alphabet for p in parents]))
        if rng.random() < 0.2:
            cpt = np.tile(rng.dirichlet(np.ones(k)), (rows, 1))  # constant node
        else:
            cpt = rng.dirichlet(np.ones(k), size=rows)
        nodes.append(Node(f"U{i}", k, parents, cpt))
    return BayesNet(nodes=tuple(nodes), source=0)


def brute_force_composite(net: BayesNet, targets) -> np.ndarray:
    """Channel from the source to joint target states by summing the full
    factored joint over every non-source node (no ancestor pruning)."""
    V = tuple(sorted(set(targets)))
    src = net.source
    others = [i for i in range(net.size) if i != src]
    v_sizes = [net.nodes[u].alphabet for u in V]
    out = np.zeros((net.nodes[src].alphabet, int(np.prod(v_sizes))))
    for x in range(net.nodes[src].alphabet):
        for combo in itertools.product(*[range(net.nodes[u].alphabet) for u in others]):
            assign = {src: x}
            assign.update(zip(others, combo))
            prob = 1.0
            for u in others:
                node = net.nodes[u]
                row = 0
                for p in node.parents:
                    row = row * net.nodes[p].alphabet + assign[p]
                prob *= node.cpt[row, assign[u]]
            col = 0
            for u, size in zip(V, v_sizes):
                col = col * size + assign[u]
            out[x, col] += prob
    return out


def brute_force_percolation(net: BayesNet, targets, taus: dict) -> float:
    """Sum over all survival configurations of the non-source nodes."""
    V = set(targets)
    src = net.source
    if src in V:
        return 1.0
    others = [i for i in range(net.size) if i != src]
    total = 0.0
    for alive_mask in itertools.product((False, True), repeat=len(others)):
        prob = 1.0
        alive = {src}
        for u, a in zip(others, alive_mask):
            t = taus[u]
            prob *= (1.0 - t) if a else t
            if a:
                alive.add(u)
        if prob == 0.0:
            continue
        # Directed reachability over surviving nodes.
        reached = {src}
        frontier = [src]
        hit = False
        while frontier and not hit:
            cur = frontier.pop()
            for c in net.children(cur):
                if c in alive and c not in reached:
                    if c in V:
                        hit = True
                        break
                    reached.add(c)
                    frontier.append(c)
        if hit:
            total += prob
    return total
