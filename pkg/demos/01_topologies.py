"""Generate the built-in topologies, score them, and synthesize a custom one.

Every topology is an immutable adjacency structure; ``score`` reports
diameter, average hop distance, maximum degree, and edge count, which is
the whole trade-off space the synthesizer optimizes over.
"""

from nocsim import topology as topo


def show(name, t):
    s = topo.score(t)
    print(
        f"{name:<28} nodes={t.node_count:<4} edges={s.edge_count:<4} "
        f"diameter={s.diameter:<3} avg_dist={s.avg_distance:.3f} "
        f"max_degree={s.max_degree}"
    )


def main():
    show("mesh(8,8)", topo.mesh(8, 8))
    show("torus(8,8)", topo.torus(8, 8))
    show("ring(16)", topo.ring(16))
    show("circulant(16; 1,4)", topo.circulant(16, (1, 4)))
    show("circulant(16; 1,6)", topo.circulant(16, (1, 6)))
    show("flattened_butterfly(4,4)", topo.flattened_butterfly(4, 4))

    # Ask for the cheapest graph on 8 nodes with degree <= 3 and diameter <= 2.
    best = topo.synthesize(8, max_degree=3, max_diameter=2, seed=0)
    show("synthesize(8, deg<=3, D<=2)", best)
    print("\nsynthesized edge list:")
    print(topo.to_edge_list_text(best))

    # An impossible request fails loudly with the Moore-bound argument.
    try:
        topo.synthesize(10, max_degree=2, max_diameter=2)
    except Exception as exc:
        print(f"infeasible as expected: {exc}")


if __name__ == "__main__":
    main()
