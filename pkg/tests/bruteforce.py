"""Brute-force labeled-graph census used as an independent oracle in tests.

Enumerates every labeled simple graph on vertices 1..n (all 2^C(n,2) edge
subsets), splits each graph into connected components and biconnected blocks,
and classifies components structurally:

  tree    component has e = v - 1 edges
  cactus  every block is a bridge (e = 1) or a cycle (e = v)
  clique  every block is complete (e = v(v-1)/2)

A graph belongs to a family when all of its components do, so the tallies
below are exactly the forest counts g_{n,k} for the corresponding built-in
connected classes (trees, cacti, husimi).
"""

from collections import Counter
from itertools import combinations


def _adjacency(n, edges):
    adj = [[] for _ in range(n + 1)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def _components(n, adj):
    seen = [False] * (n + 1)
    comps = []
    for s in range(1, n + 1):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _block_edge_sets(root, adj):
    """Edge sets of the biconnected blocks of the component containing root."""
    disc, low = {}, {}
    stack, blocks = [], []
    time = [0]

    def dfs(v, parent):
        disc[v] = low[v] = time[0]
        time[0] += 1
        for w in adj[v]:
            if w == parent:
                continue
            if w in disc:
                if disc[w] < disc[v]:
                    stack.append((v, w))
                    low[v] = min(low[v], disc[w])
            else:
                stack.append((v, w))
                dfs(w, v)
                low[v] = min(low[v], low[w])
                if low[w] >= disc[v]:
                    block = []
                    while True:
                        e = stack.pop()
                        block.append(e)
                        if e == (v, w):
                            break
                    blocks.append(block)

    dfs(root, None)
    return blocks


def _classify(comp, adj):
    v = len(comp)
    e = sum(len(adj[u]) for u in comp) // 2
    is_tree = e == v - 1
    is_cactus = True
    is_clique = True
    for block in _block_edge_sets(comp[0], adj) if e else []:
        bv = set()
        for a, b in block:
            bv.add(a)
            bv.add(b)
        be, bn = len(block), len(bv)
        if be != 1 and be != bn:
            is_cactus = False
        if be != bn * (bn - 1) // 2:
            is_clique = False
    return is_tree, is_cactus, is_clique


def census(n):
    """{family: {k: count}} over all labeled graphs on n vertices."""
    pairs = list(combinations(range(1, n + 1), 2))
    tallies = {"trees": Counter(), "cacti": Counter(), "husimi": Counter()}
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        adj = _adjacency(n, edges)
        comps = _components(n, adj)
        all_tree = all_cactus = all_clique = True
        for comp in comps:
            t, c, q = _classify(comp, adj)
            all_tree &= t
            all_cactus &= c
            all_clique &= q
        k = len(comps)
        if all_tree:
            tallies["trees"][k] += 1
        if all_cactus:
            tallies["cacti"][k] += 1
        if all_clique:
            tallies["husimi"][k] += 1
    return {name: dict(cnt) for name, cnt in tallies.items()}


def forests_with_components(n, k):
    """All labeled forests on n vertices with exactly k trees, as edge sets."""
    pairs = list(combinations(range(1, n + 1), 2))
    out = []
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        adj = _adjacency(n, edges)
        comps = _components(n, adj)
        if len(comps) != k:
            continue
        if all(_classify(c, adj)[0] for c in comps):
            out.append(frozenset(edges))
    return out
