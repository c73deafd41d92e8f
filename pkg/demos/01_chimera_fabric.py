"""Chimera fabric of the chip.

Builds the 7x8 grid of 4+4 unit cells with one cell switched off, shows
how nodes are numbered and checks that the two-colouring is proper.
"""
import numpy as np

from pbitsim import chip_topology, neighbors, two_coloring
from pbitsim.topology import NodeId, Shore

chip = chip_topology()
print("cells", chip.n_cells, "nodes", chip.num_nodes, "couplers", chip.num_edges)

# node 0 lives in cell (0, 1) because (0, 0) is disabled
print("node 0 ->", chip.node_id(0))
u = chip.flat_id(NodeId(3, 3, Shore.VERTICAL, 1))
print("node", u, "neighbours:", [(v, chip.node_id(v)[:3]) for v, _ in neighbors(chip, u)])

degree = np.diff(chip.csr[0])
vals, counts = np.unique(degree, return_counts=True)
print("degree histogram:", dict(zip(vals.tolist(), counts.tolist())))

colors = two_coloring(chip)
a, b = chip.edges.T
print("colour classes:", np.bincount(colors).tolist(), "monochrome edges:", int(np.sum(colors[a] == colors[b])))
