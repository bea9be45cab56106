"""Run reports: settlement, aggregation, and emission as CSV, JSON, or
a human summary.

A report is a nested dict with deterministic key order; the CSV is a
long-format flattening (record,name,metric,value) so the two formats
encode identical values byte-for-byte across identical runs.
"""

from __future__ import annotations

import io
import json
import math

from .chain import RewardLedger, settle_rewards
from .engine import Simulation
from .mining import distribute_pool_rewards

SECONDS_PER_DAY = 86_400.0


def binomial_ci(successes: int, attempts: int) -> tuple:
    """Normal-approximation 95% interval for a success rate."""
    if attempts == 0:
        return (0.0, 0.0, 0.0)
    p = successes / attempts
    half = 1.96 * math.sqrt(max(p * (1 - p), 0.0) / attempts)
    return (p, max(0.0, p - half), min(1.0, p + half))


def mean_ci(values: list) -> dict:
    """Seed-level replication: mean with a 95% normal interval."""
    n = len(values)
    if n == 0:
        return {"mean": 0.0, "ci_low": 0.0, "ci_high": 0.0, "n": 0}
    mean = sum(values) / n
    if n == 1:
        return {"mean": mean, "ci_low": mean, "ci_high": mean, "n": 1}
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    half = 1.96 * math.sqrt(var / n)
    return {"mean": mean, "ci_low": mean - half, "ci_high": mean + half,
            "n": n}


def build_report(sim: Simulation, scenario=None, seed=None) -> dict:
    """Assemble the full metrics report for a finished run."""
    ledger = RewardLedger(sim.block_reward)
    settlement = settle_rewards(sim.archive, ledger)
    main = sim.archive.main_chain()
    main_ids = {b.block_id for b in main}

    # per-miner accounting
    miners = {}
    empty_main: dict = {}
    for blk in main[1:]:
        if blk.is_empty:
            empty_main[blk.miner_id] = empty_main.get(blk.miner_id, 0) + 1
    for mr in sorted(sim.miners, key=lambda m: m.spec.miner_id):
        mid = mr.spec.miner_id
        main_n = settlement.main_blocks.get(mid, 0)
        rev = settlement.revenue.get(mid, 0.0)
        miners[mid] = {
            "region": mr.spec.region,
            "hash_share": mr.spec.hash_share,
            "pool": mr.spec.pool_id or "",
            "strategy": mr.spec.strategy_id,
            "blocks_found": mr.found,
            "blocks_published": mr.published,
            "blocks_main": main_n,
            "blocks_orphaned": settlement.orphan_blocks.get(mid, 0),
            "empty_main": empty_main.get(mid, 0),
            "empty_rate": (empty_main.get(mid, 0) / main_n) if main_n else 0.0,
            "revenue_btc": rev,
            "revenue_share": (rev / settlement.total_revenue
                              if settlement.total_revenue else 0.0),
        }

    # groups by region
    groups = {}
    for mid, m in miners.items():
        g = groups.setdefault(m["region"], {
            "hash_share": 0.0, "blocks_found": 0, "blocks_main": 0,
            "blocks_orphaned": 0, "empty_main": 0, "revenue_btc": 0.0})
        g["hash_share"] += m["hash_share"]
        g["blocks_found"] += m["blocks_found"]
        g["blocks_main"] += m["blocks_main"]
        g["blocks_orphaned"] += m["blocks_orphaned"]
        g["empty_main"] += m["empty_main"]
        g["revenue_btc"] += m["revenue_btc"]
    for g in groups.values():
        g["empty_rate"] = (g["empty_main"] / g["blocks_main"]
                           if g["blocks_main"] else 0.0)
        g["revenue_share"] = (g["revenue_btc"] / settlement.total_revenue
                              if settlement.total_revenue else 0.0)
    groups = {k: groups[k] for k in sorted(groups)}

    # network metrics
    prop = []
    for key in sorted(sim.prop_acc):
        phase, cls, src, dst = key
        total, count = sim.prop_acc[key]
        prop.append({"phase": phase, "size_class": cls, "src": src,
                     "dst": dst, "mean_s": total / count, "count": count})
    payload = {f"{ph}/{cls}": (b / c if c else 0.0)
               for (ph, cls), (b, c) in sorted(sim.body_bytes.items())}
    reduction = None
    full_ref = payload.get("full/full")
    compact_ref = payload.get("compact/full")
    if full_ref and compact_ref:
        reduction = 1.0 - compact_ref / full_ref
    published_n = len(sim.published)
    fork_rate = (1.0 - settlement.chain_length / published_n) \
        if published_n else 0.0

    pools = _pool_section(sim, settlement)
    attacks = _attack_section(sim, main_ids)
    censorship = _censorship_section(sim, main, scenario)
    series = _timeseries(sim, main)

    report = {
        "meta": {
            "scenario": scenario.name if scenario is not None else "adhoc",
            "seed": sim.seed if seed is None else seed,
            "sim_time_s": sim.end_time,
            "blocks_published": published_n,
            "main_chain_length": settlement.chain_length,
            "fork_rate": fork_rate,
            "total_revenue_btc": settlement.total_revenue,
            "total_fees_btc": settlement.total_fees,
        },
        "miners": miners,
        "groups": groups,
        "network": {
            "propagation": prop,
            "mean_body_payload_bytes": payload,
            "payload_reduction": reduction,
        },
        "pools": pools,
        "attacks": attacks,
        "censorship": censorship,
        "timeseries": series,
    }
    if scenario is not None:
        report["provenance"] = {
            "resolved_scenario": scenario.raw,
            "defaults_applied": scenario.defaults_applied,
        }
    return report


def _pool_section(sim: Simulation, settlement) -> dict:
    if not sim.pools:
        return {}
    sim.sample_all_ppows()
    out = {}
    for pool in sorted(sim.pools, key=lambda p: p.pool_id):
        members = sorted(pool.members)
        revenue = sum(settlement.revenue.get(m, 0.0) for m in members)
        hash_total = sum(sim.miner_by_id[m].spec.hash_share
                         for m in members if m in sim.miner_by_id)
        records = [sim.miner_by_id[m].share_record for m in members
                   if m in sim.miner_by_id
                   and sim.miner_by_id[m].share_record is not None]
        dist = distribute_pool_rewards(pool, records, revenue)
        out[pool.pool_id] = {
            "manager_region": pool.manager_region,
            "hash_share": hash_total,
            "revenue_btc": revenue,
            "revenue_per_hash": revenue / hash_total if hash_total else 0.0,
            "distributed": {m: dist.get(m, 0.0) for m in members},
            "ppow_counts": {r.miner_id: r.ppow_count for r in records},
            "blocks_submitted": {r.miner_id: r.full_blocks_submitted
                                 for r in records},
            "blocks_found": {r.miner_id: r.full_blocks_found
                             for r in records},
        }
    return out


def _attack_section(sim: Simulation, main_ids: set) -> dict:
    out: dict = {}
    ds: dict = {}
    for rec in sim.attack_log:
        kind = rec["kind"]
        if kind.startswith("double_spend"):
            entry = ds.setdefault(kind, {"attempts": 0, "successes": 0})
            entry["attempts"] += 1
            accepted = rec.get("accepted_at") is not None
            t2_on_main = any(b in main_ids
                             for b in sim.tx_blocks.get(rec["t2"], ()))
            if accepted and t2_on_main:
                entry["successes"] += 1
        elif kind == "balance_attack":
            accepted = any(r[0] == rec["t1"]
                           for m in sim.merchants
                           for r in m.acceptance_log)
            t1_on_main = any(b in main_ids
                             for b in sim.tx_blocks.get(rec["t1"], ()))
            entry = ds.setdefault(kind, {"attempts": 0, "successes": 0})
            entry["attempts"] += 1
            if accepted and not t1_on_main:
                entry["successes"] += 1
    for kind in sorted(ds):
        p, lo, hi = binomial_ci(ds[kind]["successes"], ds[kind]["attempts"])
        out[kind] = {**ds[kind], "success_rate": p,
                     "ci_low": lo, "ci_high": hi}

    for mr in sorted(sim.miners, key=lambda m: m.spec.miner_id):
        strat = mr.node.strategy
        if strat is None:
            continue
        if strat.kind == "selfish":
            total_main = sum(1 for b in main_ids) - 1
            mine = sum(1 for bid in main_ids
                       if sim.blocks[bid].miner_id == mr.spec.miner_id)
            out["selfish"] = {
                "attacker": mr.spec.miner_id,
                "hash_share": mr.spec.hash_share,
                "main_share": mine / total_main if total_main else 0.0,
            }
        elif strat.kind == "goldfinger":
            total_main = len(main_ids) - 1
            mine = sum(1 for bid in main_ids
                       if sim.blocks[bid].miner_id == mr.spec.miner_id)
            honest_orphans = sum(
                1 for bid in sim.published
                if bid not in main_ids
                and sim.blocks[bid].miner_id != mr.spec.miner_id)
            forgone = mine * 0.25
            out["goldfinger"] = {
                "attacker": mr.spec.miner_id,
                "attacker_main_share": mine / total_main if total_main else 0.0,
                "honest_orphaned_blocks": honest_orphans,
                "attacker_forgone_fees_btc": forgone,
                "honest_orphan_losses_btc":
                    honest_orphans * sim.block_reward,
            }
        elif strat.kind in ("withhold_bwh", "withhold_faw"):
            out.setdefault("withholding", {})[mr.spec.miner_id] = {
                "kind": strat.kind,
                "discarded_blocks": strat.discarded,
                "found": mr.found,
                "submitted": (mr.share_record.full_blocks_submitted
                              if mr.share_record else 0),
            }
    return out


def _censorship_section(sim: Simulation, main: list, scenario=None) -> dict:
    """Blacklisted-transaction outcomes.

    ``inclusion_rate`` counts presence on the final main chain at all;
    the windowed rate additionally requires inclusion within
    ``window_s`` of issue, the practical censorship measure (a payment
    delayed past its window is a payment denied).
    """
    if sim.censored_issued == 0:
        return {}
    window = 1800.0
    if scenario is not None:
        for inj in scenario.get("injections", ()):
            if inj.get("kind") == "censored_stream" and "window_s" in inj:
                window = float(inj["window_s"])
    included_at = {}
    for blk in main[1:]:
        for tx in blk.txs[1:]:
            if tx.censored and tx.tx_id not in included_at:
                included_at[tx.tx_id] = blk.found_at
    on_main = len(included_at)
    windowed = sum(
        1 for tx_id, issued_at in sim.censored_log
        if tx_id in included_at
        and included_at[tx_id] - issued_at <= window)
    return {
        "issued": sim.censored_issued,
        "on_main_chain": on_main,
        "inclusion_rate": on_main / sim.censored_issued,
        "included_within_window": windowed,
        "windowed_inclusion_rate": windowed / sim.censored_issued,
        "window_s": window,
    }


def _timeseries(sim: Simulation, main: list) -> list:
    days: dict = {}
    region_of = {mr.spec.miner_id: mr.spec.region for mr in sim.miners}
    for blk in main[1:]:
        day = int(blk.found_at // SECONDS_PER_DAY)
        region = region_of.get(blk.miner_id, "other")
        cell = days.setdefault((day, region), [0, 0])
        cell[0] += 1
        cell[1] += 1 if blk.is_empty else 0
    return [{"day": d, "region": r, "blocks": c[0], "empty": c[1]}
            for (d, r), c in sorted(days.items())]


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_rows(report: dict) -> list:
    """Flatten a report into (record, name, metric, value) rows in a
    stable order."""
    rows = []
    for metric, value in report["meta"].items():
        rows.append(("meta", report["meta"]["scenario"], metric, value))
    for mid, m in report.get("miners", {}).items():
        for metric, value in m.items():
            rows.append(("miner", mid, metric, value))
    for gid, g in report.get("groups", {}).items():
        for metric, value in g.items():
            rows.append(("group", gid, metric, value))
    network = report.get("network", {})
    for p in network.get("propagation", ()):
        name = f"{p['phase']}/{p['size_class']}/{p['src']}->{p['dst']}"
        rows.append(("propagation", name, "mean_s", p["mean_s"]))
        rows.append(("propagation", name, "count", p["count"]))
    for phase, v in network.get("mean_body_payload_bytes", {}).items():
        rows.append(("network", phase, "mean_body_payload_bytes", v))
    if network.get("payload_reduction") is not None:
        rows.append(("network", "relay", "payload_reduction",
                     network["payload_reduction"]))
    for pid, p in report.get("pools", {}).items():
        for metric in ("hash_share", "revenue_btc", "revenue_per_hash"):
            rows.append(("pool", pid, metric, p[metric]))
        for member, btc in p["distributed"].items():
            rows.append(("pool", pid, f"distributed.{member}", btc))
    for kind, a in report.get("attacks", {}).items():
        if kind == "withholding":
            for mid, w in a.items():
                for metric, value in w.items():
                    rows.append(("attack", f"withholding.{mid}",
                                 metric, value))
        else:
            for metric, value in a.items():
                rows.append(("attack", kind, metric, value))
    for metric, value in report.get("censorship", {}).items():
        rows.append(("censorship", "censorship", metric, value))
    for section in ("deanon", "deanon_origin"):
        for metric, value in report.get(section, {}).items():
            rows.append((section, section, metric, value))
    for cell in report.get("timeseries", ()):
        name = f"day{cell['day']}/{cell['region']}"
        rows.append(("timeseries", name, "blocks", cell["blocks"]))
        rows.append(("timeseries", name, "empty", cell["empty"]))
    return rows


def emit_csv(report: dict) -> str:
    buf = io.StringIO()
    buf.write("record,name,metric,value\n")
    for record, name, metric, value in report_rows(report):
        buf.write(f"{record},{name},{metric},{_fmt(value)}\n")
    return buf.getvalue()


def emit_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def summary_text(report: dict) -> str:
    """Headline numbers with the reference behaviour each one speaks to."""
    meta = report["meta"]
    head = f"scenario {meta['scenario']} (seed {meta['seed']})"
    if "main_chain_length" in meta:
        head += (f": {meta['main_chain_length']} main-chain blocks, "
                 f"fork rate {meta['fork_rate']:.4f}")
    lines = [head]
    if "deanon" in report:
        d = report["deanon"]
        lines.append(
            f"  clustering at p_merge {d['p_merge']}: precision "
            f"{d['precision']:.4f} (sound by construction), recall "
            f"{d['recall']:.4f} over {d['clusters']} clusters")
    if "deanon_origin" in report:
        d = report["deanon_origin"]
        lines.append(
            f"  origin inference: accuracy {d['accuracy']:.4f} over "
            f"{d['transactions']} txs (random baseline "
            f"{d['random_baseline']:.4f})")
    if "groups" not in report:
        return "\n".join(lines) + "\n"
    prov = report.get("provenance", {})
    fee_traffic = prov.get("resolved_scenario", {}) \
        .get("mempool", {}).get("rate_tps", 0) > 0
    ref = (" (2015-16 reference: boundary pools 3-13%, others 2-3%)"
           if fee_traffic else "")
    for gid, g in report["groups"].items():
        lines.append(
            f"  group {gid}: hash {g['hash_share']:.4f}, "
            f"revenue share {g['revenue_share']:.4f}, "
            f"empty-block rate {g['empty_rate']:.4f}{ref}")
    red = report["network"]["payload_reduction"]
    if red is not None:
        lines.append(f"  compact relay payload reduction: {red:.4f} "
                     f"(reference: ~98%)")
    for kind, a in report["attacks"].items():
        if isinstance(a, dict) and "success_rate" in a:
            lines.append(
                f"  {kind}: {a['successes']}/{a['attempts']} succeeded "
                f"({a['success_rate']:.4f} "
                f"[{a['ci_low']:.4f}, {a['ci_high']:.4f}])")
        elif kind == "selfish":
            lines.append(
                f"  selfish mining: hash {a['hash_share']:.3f} -> "
                f"main-chain share {a['main_share']:.4f} "
                f"(profitable above ~0.25 when half the network "
                f"races for the attacker)")
        elif kind == "goldfinger":
            lines.append(
                f"  goldfinger: attacker main-chain share "
                f"{a['attacker_main_share']:.4f}, honest blocks orphaned "
                f"{a['honest_orphaned_blocks']}")
    if report["censorship"]:
        c = report["censorship"]
        lines.append(
            f"  censorship: {c['on_main_chain']}/{c['issued']} blacklisted "
            f"txs reached the main chain "
            f"(inclusion rate {c['inclusion_rate']:.4f})")
    return "\n".join(lines) + "\n"
