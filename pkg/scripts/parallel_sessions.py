"""Run three tenants' sessions side by side on the two-switch facility.

Provisions an E2E session (tenant1, conducted), DU conformance (tenant2) and
radiated RU conformance (tenant3), verifies each, probes every cross-tenant
device pair on every active VID, and optionally tears everything down.

    python scripts/parallel_sessions.py --teardown
"""

from __future__ import annotations

import argparse
import json
import logging
import time
from dataclasses import dataclass
from itertools import combinations

from otic.driver import dumps, export_switch_configs
from otic.fixtures import provision_standard, two_switch_facility

log = logging.getLogger("parallel_sessions")


@dataclass
class Config:
    base: str = "10.77.0.0/16"
    teardown: bool = False
    export: bool = False


def cross_tenant_probes(engine) -> tuple[int, int]:
    fab = engine.fabric()
    tenant_of = {d: o for d, o in engine.ownership().items() if o}
    for s in engine.active_sessions():
        tenant_of.update({d: s.tenants[0] for d in s.participants})
    probes = hits = 0
    for a, b in combinations(sorted(tenant_of), 2):
        if tenant_of[a] == tenant_of[b]:
            continue
        pa = [p.id for p in engine.inventory.devices[a].ports if p.medium.digital]
        pb = [p.id for p in engine.inventory.devices[b].ports if p.medium.digital]
        for vid in engine.vlans.active:
            for x in pa:
                for y in pb:
                    probes += 1
                    hits += fab.l2_reachable(x, y, vid)
    return probes, hits


def run(cfg: Config) -> dict:
    t0 = time.perf_counter()
    fac = two_switch_facility(cfg.base)
    eng = fac.engine
    ids = provision_standard(fac)
    rows = []
    for tenant, sid in ids.items():
        report = eng.verify(sid)
        s = eng.session(sid)
        rows.append({
            "tenant": tenant, "session": sid, "kind": s.kind.value, "state": s.state.value,
            "vids": sorted(s.allocations.vids.values()),
            "subnets": {k.value: str(v) for k, v in s.allocations.subnets.items()},
            "edges_passed": sum(r.passed for r in report.intent_results),
            "edges": len(report.intent_results),
            "violations": len(report.isolation_violations),
        })
    probes, hits = cross_tenant_probes(eng)
    out = {"sessions": rows, "cross_tenant_probes": probes, "reachable_probes": hits}
    if cfg.export:
        out["configs"] = json.loads(dumps(export_switch_configs(eng)))
    if cfg.teardown:
        before = eng.vlans.active
        for sid in ids.values():
            eng.teardown(sid)
        out["released_vids"] = sorted(before)
        out["active_after_teardown"] = sorted(eng.vlans.active)
    out["seconds"] = round(time.perf_counter() - t0, 3)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", default=Config.base)
    ap.add_argument("--teardown", action="store_true")
    ap.add_argument("--export", action="store_true", help="include switch config documents")
    ap.add_argument("-v", "--verbose", action="store_true")
    a = ap.parse_args()
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING)
    print(json.dumps(run(Config(a.base, a.teardown, a.export)), indent=2))


if __name__ == "__main__":
    main()
