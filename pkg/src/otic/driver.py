"""Switch configuration documents and the driver boundary.

A driver takes the per-switch documents produced by
:func:`export_switch_configs` and realizes them. Only the simulated driver
exists; it "applies" documents by building a :class:`FabricModel`, which is
what a real driver would have to reproduce on hardware.

Driver contract:

* ``apply(inventory, documents) -> FabricModel``
* every port listed in a document is configured exactly as listed;
* ports a document omits are left shut down;
* applying the same documents twice yields the same model.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Optional, Protocol

from otic._util import natural_key
from otic.errors import NotFound, ValidationError
from otic.fabric import FabricModel, PortConfig, PortMode, Router, build_fabric
from otic.inventory import Inventory

CONFIG_VERSION = 1


def export_switch_configs(engine) -> list[dict]:
    """One document per switch, every port listed (unclaimed ports shut down)."""
    configs = {c.port: c for c in engine.effective_port_configs()}
    docs = []
    for sw_id in sorted(engine.inventory.switches, key=natural_key):
        sw = engine.inventory.switches[sw_id]
        sessions = set()
        ports = []
        for p in sw.ports:
            cfg = configs[p.id]
            sessions.update(engine.claims.get(p.id, {}))
            ports.append({"name": p.name, "mode": cfg.mode.value, "vids": sorted(cfg.vids),
                          "oob": cfg.oob})
        docs.append({
            "version": CONFIG_VERSION,
            "switch_id": sw_id,
            "model": sw.model,
            "ports": ports,
            "generated_from": sorted(sessions, key=natural_key),
        })
    return docs


def dumps(documents: Iterable[Mapping]) -> str:
    return json.dumps(list(documents), indent=2, sort_keys=True)


class SwitchDriver(Protocol):
    def apply(self, inventory: Inventory, documents: Iterable[Mapping]) -> FabricModel: ...


class SimulatedDriver:
    """Driver that turns config documents into an in-memory fabric."""

    def __init__(self, router: Optional[Router] = None, active_vids: Optional[Iterable[int]] = None):
        self.router = router
        self.active_vids = active_vids

    def apply(self, inventory: Inventory, documents: Iterable[Mapping]) -> FabricModel:
        configs = []
        for doc in documents:
            if doc.get("version") != CONFIG_VERSION:
                raise ValidationError(f"unsupported config version {doc.get('version')!r}")
            sw_id = doc["switch_id"]
            if sw_id not in inventory.switches:
                raise NotFound(f"unknown switch {sw_id!r}")
            for entry in doc["ports"]:
                configs.append(PortConfig(f"{sw_id}:{entry['name']}", PortMode(entry["mode"]),
                                          frozenset(entry["vids"]), entry.get("oob", False)))
        return build_fabric(inventory, configs, self.router, self.active_vids)
