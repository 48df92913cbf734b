"""Latency-throughput curve and saturation point of an 8x8 mesh.

Average latency stays near the zero-load value until the offered load
approaches the network's capacity, then blows up. ``measure_saturation``
walks an increasing rate grid and reports the first rate whose latency
exceeds three times the zero-load point.
"""

from nocsim import engine, topology as topo, workload


def main():
    cfg = engine.SimConfig(
        topology=topo.mesh(8, 8),
        algorithm="xy",
        traffic=workload.TrafficSpec(injection_rate=0.005, packet_length=4, seed=1),
        warmup_cycles=500,
        measure_cycles=3000,
        drain_cycles=0,
        strict=False,
    )
    grid = [0.005, 0.05, 0.10, 0.15, 0.18, 0.21, 0.24]
    result = engine.measure_saturation(cfg, grid)

    print(f"{'rate':>6} {'avg latency':>12}")
    for rate, latency in result.latencies:
        print(f"{rate:>6.3f} {latency:>12.2f}")
    print(f"\nzero-load latency: {result.zero_load_latency:.2f} cycles")
    if result.saturated:
        print(f"saturation rate:   {result.rate} flits/node/cycle")
    else:
        print("network did not saturate on this grid")


if __name__ == "__main__":
    main()
