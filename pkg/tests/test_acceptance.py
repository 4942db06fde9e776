"""End-to-end acceptance gate.

Each test covers one numbered claim about the system, prints a single
[PASS] line with the measured values, and fails loudly otherwise. Every
simulation here flows through audited(), so packet conservation and per-flow
FIFO order are rechecked on each run; the final test reports that tally.
"""

import random
import time
from dataclasses import replace

from xorsim.cli import ExperimentPlan, run_plan
from xorsim.coding import Scheme
from xorsim.metrics import finalize
from xorsim.packet import NativePacket, PacketUid, xor_decode, xor_encode, xor_payloads
from xorsim.scenarios import (
    chain_scenario,
    junction_scenario,
    long_chain_scenario,
    random_scenario,
)
from xorsim.simulator import Simulation, audit_conservation, fifo_violations, run

AUDITED = {"runs": 0}


def audited(sim):
    problems = audit_conservation(sim) + fifo_violations(sim)
    assert problems == [], f"invariant violations: {problems}"
    AUDITED["runs"] += 1
    return sim


def announce(number, detail, started):
    print(f"[PASS] criterion {number}: {detail} ({time.perf_counter() - started:.2f} s)")


def test_criterion_1_chain_exchange_counts():
    started = time.perf_counter()
    tx = {}
    for scheme in Scheme:
        sim = audited(run(chain_scenario(scheme)))
        tx[scheme] = sim.total_tx
        assert set(sim.delivered) == set(sim.generated)
    assert tx[Scheme.NON_CODING] == 4
    assert tx[Scheme.COPE] == 3
    assert tx[Scheme.EXCODE] == 3
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    announce(1, f"chain exchange tx none={tx[Scheme.NON_CODING]} "
                f"cope={tx[Scheme.COPE]} excode={tx[Scheme.EXCODE]}", started)


def test_criterion_2_junction_codes_beyond_two_hops():
    started = time.perf_counter()
    ex = audited(run(junction_scenario(Scheme.EXCODE)))
    assert ex.per_node_encodes == {2: 1}  # exactly one mix, at the shared relay
    assert ex.decode_failures == 0
    assert set(ex.delivered) == set(ex.generated)
    for uid, (_, pkt) in ex.delivered.items():
        assert pkt.payload == ex.generated[uid].payload
    cope = audited(run(junction_scenario(Scheme.COPE)))
    assert cope.encode_count == 0
    assert set(cope.delivered) == set(cope.generated)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    announce(2, f"junction encodes excode={ex.encode_count} cope={cope.encode_count}, "
                f"both destinations decoded", started)


def test_criterion_3_long_chain_codes_mid_route():
    started = time.perf_counter()
    ex = audited(run(long_chain_scenario(Scheme.EXCODE)))
    route_hops = {len(p.route) - 1 for p in ex.generated.values()}
    assert route_hops == {7}  # well past the two-hop regime
    assert ex.per_node_encodes == {4: 1}  # interior relay, 3 hops from either end
    assert ex.decode_failures == 0
    for uid, (_, pkt) in ex.delivered.items():
        assert pkt.payload == ex.generated[uid].payload
    cope = audited(run(long_chain_scenario(Scheme.COPE)))
    assert cope.encode_count == 0
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    announce(3, f"7-hop crossing flows coded at relay 4 (excode={ex.encode_count}, "
                f"cope={cope.encode_count}), payloads bit-exact", started)


def test_criterion_4_no_decode_failures_across_random_fields():
    started = time.perf_counter()
    encodes = 0
    scenarios = 0
    # standard 16-node fields at the default duration
    for seed in range(100):
        for scheme in Scheme:
            sim = audited(run(random_scenario(
                scheme, seed=seed, n_flows=3, rate=2.0, capture_trace=False)))
            assert sim.decode_failures == 0, (seed, scheme)
            encodes += sim.encode_count
        scenarios += 1
    # extra saturated fields, where relays queue up and mix constantly
    for seed in range(25):
        for scheme in Scheme:
            sim = audited(run(random_scenario(
                scheme, seed=seed, n_flows=8, rate=150.0, duration=3.0,
                capture_trace=False)))
            assert sim.decode_failures == 0, ("saturated", seed, scheme)
            encodes += sim.encode_count
        scenarios += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    announce(4, f"{scenarios} random scenarios x 3 schemes, 0 decode failures "
                f"({encodes} encodes exercised)", started)


def test_criterion_5_coding_opportunity_superset():
    started = time.perf_counter()

    def probe(node, p, q, cope_ok, excode_ok):
        assert not (cope_ok and not excode_ok), (node, p.uid, q.uid)

    cells = {}
    for flows in (2, 4, 6, 8):
        for seed in range(5):
            counts = {}
            for scheme in (Scheme.EXCODE, Scheme.COPE):
                scn = random_scenario(scheme, seed=seed, n_flows=flows,
                                      rate=150.0, duration=4.0, capture_trace=False)
                sim = Simulation(scn)
                sim.pair_probe = probe  # no pair is report-codable but not holder-codable
                counts[scheme] = finalize(audited(sim.run()))
            assert counts[Scheme.EXCODE].encode_count >= counts[Scheme.COPE].encode_count, \
                (flows, seed)
            cells[(flows, seed)] = counts
    busy = [c for (flows, _), c in cells.items() if flows >= 4]
    gap = sum(
        c[Scheme.EXCODE].encoded_fraction - c[Scheme.COPE].encoded_fraction for c in busy
    ) / len(busy)
    assert gap > 0.0
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    announce(5, f"encode dominance in {len(cells)} cells, "
                f"mean encoded-fraction gap {gap:+.4f} at >=4 flows", started)


def test_criterion_6_throughput_and_delay_ordering():
    started = time.perf_counter()
    tol = 0.01
    means = {}
    for scheme in Scheme:
        reports = [
            finalize(audited(run(random_scenario(
                scheme, seed=seed, n_flows=8, rate=200.0, duration=4.0,
                capture_trace=False))))
            for seed in range(20)
        ]
        means[scheme] = (
            sum(r.throughput_kbps for r in reports) / len(reports),
            sum(r.mean_delay_s for r in reports) / len(reports),
        )
    tp = {s: means[s][0] for s in Scheme}
    delay = {s: means[s][1] for s in Scheme}
    assert tp[Scheme.EXCODE] >= tp[Scheme.COPE] * (1 - tol)
    assert tp[Scheme.COPE] >= tp[Scheme.NON_CODING] * (1 - tol)
    assert delay[Scheme.EXCODE] <= delay[Scheme.NON_CODING] * (1 + tol)
    gain_cope = 100.0 * (tp[Scheme.EXCODE] / tp[Scheme.COPE] - 1.0)
    gain_none = 100.0 * (tp[Scheme.EXCODE] / tp[Scheme.NON_CODING] - 1.0)
    delay_cut = 100.0 * (1.0 - delay[Scheme.EXCODE] / delay[Scheme.NON_CODING])
    elapsed = time.perf_counter() - started
    assert elapsed < 300.0
    announce(6, "20-seed means at 8 flows: throughput "
                f"excode={tp[Scheme.EXCODE]:.1f} cope={tp[Scheme.COPE]:.1f} "
                f"none={tp[Scheme.NON_CODING]:.1f} kb/s "
                f"({gain_cope:+.1f}% vs cope, {gain_none:+.1f}% vs none), "
                f"delay cut {delay_cut:.1f}%", started)


def test_criterion_7_codec_property_suite():
    started = time.perf_counter()
    rng = random.Random("acceptance-codec")
    for trial in range(1000):
        size = rng.randrange(1, 513)
        pa, pb = rng.randbytes(size), rng.randbytes(size)
        p = NativePacket(PacketUid(0, trial), 0, 2, (0, 1, 2), 0,
                         frozenset({0}), pa, 0.0)
        q = NativePacket(PacketUid(1, trial), 2, 0, (2, 1, 0), 0,
                         frozenset({2}), pb, 0.0)
        e = xor_encode(p, q, 0.0)
        assert xor_decode(e, q).payload == pa
        assert xor_decode(e, p).payload == pb
        assert e == xor_encode(q, p, 0.0)  # commutative
        assert xor_payloads(xor_payloads(pa, pb), pb) == pa  # involution
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    announce(7, "1000 randomized roundtrips bit-exact, commutativity and "
                "involution hold", started)


def test_criterion_8_determinism(tmp_path):
    started = time.perf_counter()
    scn = random_scenario(Scheme.EXCODE, seed=11, n_flows=6, rate=100.0, duration=2.0)
    first = audited(run(scn))
    second = audited(run(replace(scn)))
    assert first.trace_log.sha256() == second.trace_log.sha256()
    assert finalize(first) == finalize(second)

    plan = ExperimentPlan(duration=2.0, rate=40.0, flow_count=4,
                          sweep_seeds=[0, 1])
    run_plan(plan, tmp_path / "a")
    run_plan(plan, tmp_path / "b")
    csv_a = (tmp_path / "a" / "results.csv").read_bytes()
    csv_b = (tmp_path / "b" / "results.csv").read_bytes()
    assert csv_a == csv_b
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    announce(8, f"trace sha256 {first.trace_log.sha256()[:12]}... reproduced; "
                f"results.csv byte-identical ({len(csv_a)} bytes)", started)


def test_criterion_9_invariants_held_everywhere():
    assert AUDITED["runs"] >= 400
    announce(9, f"conservation + FIFO audits clean on all {AUDITED['runs']} "
                "acceptance runs", time.perf_counter())
