#!/usr/bin/env python3
"""Writes the dendrogram fixtures used by the tests and reference configs.

Trees are nested 2-tuples of leaf labels; node ids are assigned top-down
(root = 1, breadth-first) and heights decrease with depth.
"""
import json
import sys
from collections import Counter, deque
from pathlib import Path


def to_json(tree, heights=None):
    leaves, nodes = [], []
    ids = {}
    queue = deque([tree])
    next_id = 1
    while queue:  # breadth-first numbering
        t = queue.popleft()
        if isinstance(t, tuple):
            ids[id(t)] = next_id
            next_id += 1
            queue.extend(t)
    depth = {}

    def walk(t, d):
        if not isinstance(t, tuple):
            leaves.append(t)
            return 0
        depth[id(t)] = d
        below = max(walk(c, d + 1) for c in t)
        ref = lambda c: ids[id(c)] if isinstance(c, tuple) else "leaf:" + c
        h = heights[ids[id(t)]] if heights else float(below + 1)
        nodes.append({"id": ids[id(t)], "left": ref(t[0]), "right": ref(t[1]), "height": h})
        return below + 1

    walk(tree, 1)
    nodes.sort(key=lambda n: n["id"])
    return {"leaves": leaves, "nodes": nodes, "root": 1}


def orders(tree, d=0, out=None):
    out = {} if out is None else out
    if isinstance(tree, tuple):
        for c in tree:
            orders(c, d + 1, out)
    else:
        out[tree] = d
    return out


def relabel(tree, mapping):
    if isinstance(tree, tuple):
        return tuple(relabel(c, mapping) for c in tree)
    return mapping[tree]


# Example tree: the path of leaf "i" is a10, a8, a5, a4, a2, a1 (order 6).
FIG1_NODES = {
    1: ("a2", "a3"), 2: ("a4", "B"), 3: ("a6", "a7"), 4: ("a5", "C"), 5: ("a8", "a9"),
    6: ("D", "E"), 7: ("F", "G"), 8: ("a10", "H"), 9: ("I", "J"), 10: ("i", "a11"), 11: ("K", "L"),
}
FIG1_HEIGHTS = {1: 10.0, 2: 9.0, 3: 5.0, 4: 8.0, 5: 7.0, 6: 1.0, 7: 2.0, 8: 6.0, 9: 3.0, 10: 4.0, 11: 1.0}


def fig1_json():
    leaves, nodes = [], []
    for nid in sorted(FIG1_NODES):
        kids = []
        for c in FIG1_NODES[nid]:
            if c.startswith("a") and c[1:].isdigit():
                kids.append(int(c[1:]))
            else:
                kids.append("leaf:" + c)
                leaves.append(c)
        nodes.append({"id": nid, "left": kids[0], "right": kids[1], "height": FIG1_HEIGHTS[nid]})
    return {"leaves": sorted(leaves), "nodes": nodes, "root": 1}


S = ["S%02d" % k for k in range(1, 26)]
# 25 leaves with hierarchical orders spanning 3..8.
TREE25 = (
    ((S[0], S[1]), (S[2], S[3])),
    (
        ((S[4], S[5]), (S[6], (S[7], S[8]))),
        (
            ((S[9], S[10]), (S[11], (S[12], S[13]))),
            (
                (S[14], (S[15], (S[16], S[17]))),
                ((S[18], (S[19], (S[20], S[21]))), (S[22], (S[23], S[24]))),
            ),
        ),
    ),
)
# Second regime: same shape with deep and shallow leaves exchanged.
SWAP = {
    "S01": "S21", "S02": "S22", "S03": "S17", "S04": "S18", "S21": "S01", "S22": "S02",
    "S17": "S03", "S18": "S04", "S05": "S24", "S24": "S05", "S06": "S25", "S25": "S06",
    "S07": "S20", "S20": "S07", "S13": "S16", "S16": "S13",
}
TREE25_B = relabel(TREE25, {s: SWAP.get(s, s) for s in S})


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fig1_tree.json").write_text(json.dumps(fig1_json(), indent=2) + "\n")
    (out / "tree25_regime1.json").write_text(json.dumps(to_json(TREE25), indent=2) + "\n")
    (out / "tree25_regime2.json").write_text(json.dumps(to_json(TREE25_B), indent=2) + "\n")
    o1, o2 = orders(TREE25), orders(TREE25_B)
    print("regime1 orders", sorted(Counter(o1.values()).items()))
    print("up", sum(o2[s] > o1[s] for s in S), "down", sum(o2[s] < o1[s] for s in S),
          "changes", sorted(o2[s] - o1[s] for s in S))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
