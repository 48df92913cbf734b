"""Channel-dependency-graph deadlock analysis for routing functions.

A routing function is deadlock-free if the graph of "holding channel A
may wait for channel B" dependencies is acyclic. Dimension-ordered XY on
a mesh is the classic safe case; the same function on a torus is unsafe
because wrap-around links close dependency rings, and adding a second
virtual channel with a dateline rule breaks them again.
"""

from nocsim import routing, topology as topo


def check(label, t, relation, vcs=1):
    cdg = routing.build_cdg(t, relation, vcs)
    free = routing.is_deadlock_free(cdg)
    print(f"{label:<42} deadlock-free: {free}")


def main():
    mesh = topo.mesh(8, 8)
    torus = topo.torus(8, 8)
    ring = topo.ring(4)

    check("XY on mesh(8,8)", mesh, routing.xy_relation(mesh))
    check("DyXY (zero congestion) on mesh(8,8)", mesh, routing.dyxy_relation(mesh))
    check("minimal adaptive on ring(4)", ring, routing.minimal_adaptive_relation(ring))
    check("XY on torus(8,8), 1 VC", torus, routing.xy_relation(torus))
    check(
        "XY on torus(8,8), 2 VCs + dateline",
        torus,
        routing.torus_xy_dateline_relation(torus, 2),
        vcs=2,
    )


if __name__ == "__main__":
    main()
