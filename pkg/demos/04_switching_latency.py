"""Zero-load latency of the three switching policies, measured vs closed form.

A single packet on an idle line network: store-and-forward pays the full
serialization delay at every hop, H*(F+P) cycles; wormhole and virtual
cut-through pipeline the flits and pay H*(1+P) + (F-1). The simulator
reproduces both formulas exactly, cycle for cycle.
"""

from nocsim import engine, fabric, topology as topo, workload


def measure(switching, hops, flits, pipeline=1):
    t = topo.mesh(hops + 1, 1)
    cfg = engine.SimConfig(
        topology=t,
        algorithm="xy",
        traffic=workload.TrafficSpec(injection_rate=0.0, packet_length=flits),
        switching=switching,
        pipeline=pipeline,
        buffer_depth=max(flits, 4),
        preloaded=((0, 0, hops),),
        warmup_cycles=0,
        measure_cycles=(hops + 1) * (flits + pipeline) + 20,
        drain_cycles=20,
    )
    return engine.run(cfg).avg_latency


def main():
    print(f"{'policy':<10} {'hops':>4} {'flits':>5} {'measured':>9} {'closed form':>12}")
    for switching in fabric.SWITCHING_POLICIES:
        for hops, flits in ((2, 1), (5, 4), (8, 8)):
            got = measure(switching, hops, flits)
            want = engine.zero_load_latency(switching, hops, flits, pipeline=1)
            mark = "" if got == want else "  <-- MISMATCH"
            print(f"{switching:<10} {hops:>4} {flits:>5} {got:>9.0f} {want:>12}{mark}")


if __name__ == "__main__":
    main()
