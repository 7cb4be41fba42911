"""
Read and write fitted forests as versioned JSON documents.

Layout of format version 1:

```json
{
  "format": "rfcheck-forest",
  "version": 1,
  "n": 1000,
  "p": 2,
  "params": {"trees": 100, "mtry": 1, "subsample_size": 500, "leaves": 50, "seed": 7},
  "trees": [
    {
      "requested_leaves": 50,
      "subsample": [0, 3, ...],
      "nodes": [
        {"lower": [0.0, 0.0], "upper": [1.0, 1.0], "depth": 0, "mean": 0.41,
         "cut": [2, 0.4375], "children": [1, 2]},
        {"lower": [0.0, 0.0], "upper": [1.0, 0.4375], "depth": 1, "mean": 0.12,
         "points": [3, 17, ...]},
        ...
      ]
    }
  ]
}
```

Cut directions are 1-based. Only leaves list their dataset row indices; an
internal node holds the points of its left child followed by those of its
right child. Floats are written with Python's shortest round-trip repr, so
loading reproduces every bound, cut and mean exactly.
"""

import json
import logging
import pathlib

import numpy as np

from rfcheck.errors import ParseError
from rfcheck.forest.forest import Forest, ForestParams
from rfcheck.forest.splitter import Cut
from rfcheck.forest.tree import Cell, GrownTree, TreeNode
from rfcheck.util import PathLike, atomic_writer

format_name = "rfcheck-forest"
format_version = 1


def _node_to_dict(node: TreeNode) -> dict:
    record = {
        "lower": node.cell.lower.tolist(),
        "upper": node.cell.upper.tolist(),
        "depth": node.depth,
        "mean": float(node.mean),
    }
    if node.is_leaf:
        record["points"] = node.cell.point_indices.tolist()
    else:
        record["cut"] = [node.cut.direction, float(node.cut.position)]
        record["children"] = list(node.children)
    return record


def forest_to_dict(forest: Forest) -> dict:
    return {
        "format": format_name,
        "version": format_version,
        "n": forest.n,
        "p": forest.p,
        "params": forest.params.to_dict(),
        "trees": [
            {
                "requested_leaves": tree.requested_leaves,
                "subsample": tree.subsample_indices.tolist(),
                "nodes": [_node_to_dict(node) for node in tree.nodes],
            }
            for tree in forest.trees
        ],
    }


def _tree_from_dict(record: dict) -> GrownTree:
    raw_nodes = record["nodes"]
    points = [None] * len(raw_nodes)
    # children are always created after their parent
    for node_id in reversed(range(len(raw_nodes))):
        raw = raw_nodes[node_id]
        if "cut" in raw:
            left, right = raw["children"]
            points[node_id] = np.concatenate([points[left], points[right]])
        else:
            points[node_id] = np.asarray(raw["points"], dtype=np.intp)
    nodes = []
    for node_id, raw in enumerate(raw_nodes):
        cut = Cut(*raw["cut"]) if "cut" in raw else None
        nodes.append(
            TreeNode(
                cell=Cell(raw["lower"], raw["upper"], points[node_id]),
                depth=raw["depth"],
                mean=raw["mean"],
                cut=cut,
                children=tuple(raw["children"]) if cut else None,
            )
        )
    return GrownTree(nodes, record["subsample"], record["requested_leaves"])


def forest_from_dict(document: dict) -> Forest:
    if document.get("format") != format_name:
        raise ParseError(f"not an {format_name} document")
    version = document.get("version")
    if version != format_version:
        raise ParseError(
            f"unsupported {format_name} version {version!r} "
            f"(this rfcheck reads version {format_version})"
        )
    try:
        params = ForestParams(**document["params"])
        trees = [_tree_from_dict(record) for record in document["trees"]]
        return Forest(params, trees, n=document["n"], p=document["p"])
    except (KeyError, TypeError, IndexError, ValueError) as error:
        raise ParseError(f"malformed forest document: {error!r}") from error


def save(forest: Forest, path: PathLike) -> None:
    text = json.dumps(forest_to_dict(forest), separators=(",", ":"))
    with atomic_writer(path) as write_file:
        write_file.write(text + "\n")
    logging.info(f"wrote forest of {len(forest.trees)} trees to {path}")


def load(path: PathLike) -> Forest:
    path = pathlib.Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise ParseError(f"{path}: {error.msg}", line=error.lineno) from error
    return forest_from_dict(document)
