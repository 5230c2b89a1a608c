"""``oticctl``: operator command line over a persistent state directory.

Exit codes: 0 ok, 1 usage or request error, 2 intent failure,
3 isolation violation, 4 resource exhaustion.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Optional, Sequence

from otic import driver
from otic.errors import OticError
from otic.fabric import VerificationReport
from otic.http_api import Api, TokenMap, serve, session_document, tenant_document
from otic.inventory import PortSpec, ethernet_ports
from otic.persistence import StateStore

EXIT_OK, EXIT_USAGE, EXIT_INTENT, EXIT_ISOLATION, EXIT_EXHAUSTED = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _report_exit(report: VerificationReport) -> int:
    if report.isolation_violations:
        return EXIT_ISOLATION
    if not report.intent_passed:
        return EXIT_INTENT
    return EXIT_OK


def _kv(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oticctl", description="O-RAN test facility orchestrator")
    p.add_argument("--state-dir", default=os.environ.get("OTIC_STATE_DIR", ".otic"))
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    plan = sub.add_parser("plan").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    plan.add_parser("init").add_argument("cidr")
    plan.add_parser("show")

    site = sub.add_parser("site").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    sr = site.add_parser("register")
    sr.add_argument("name")
    sr.add_argument("kind", choices=["data_center", "lab", "anechoic_chamber", "outdoor"])

    switch = sub.add_parser("switch").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    swr = switch.add_parser("register")
    swr.add_argument("site")
    swr.add_argument("model")
    swr.add_argument("--ports", type=int, default=0, help="number of ethernet ports")
    swr.add_argument("--gbps", type=float, default=100)
    swr.add_argument("--prefix", default="p")
    swr.add_argument("--clock", default="none", choices=["none", "t_bc", "t_gm"])

    dev = sub.add_parser("device").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    dr = dev.add_parser("register")
    dr.add_argument("site")
    dr.add_argument("kind")
    dr.add_argument("--role", required=True, choices=["dut", "te", "service"])
    dr.add_argument("--owner")
    dr.add_argument("--port", action="append", default=[], help="name[:medium[:gbps]]")
    dr.add_argument("--feature", action="append", default=[], help="key=v1,v2")
    dl = dev.add_parser("link")
    dl.add_argument("port_a")
    dl.add_argument("port_b")
    dl.add_argument("--kind", default="access", choices=["access", "trunk", "analog", "oob"])

    inv = sub.add_parser("inventory").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    inv.add_parser("export")

    tenant = sub.add_parser("tenant").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("create", "delete", "show"):
        tenant.add_parser(name).add_argument("name")

    sess = sub.add_parser("session").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    sp = sess.add_parser("plan")
    sp.add_argument("kind")
    sp.add_argument("--tenant", action="append", required=True)
    sp.add_argument("--participant", action="append", required=True)
    sp.add_argument("--analog-mode", choices=["radiated", "conducted"])
    sp.add_argument("--impair", action="append", default=[])
    sp.add_argument("--shared", action="store_true")
    sp.add_argument("--option", action="append", default=[], help="key=json-value")
    for name in ("provision", "verify", "teardown", "show"):
        sess.add_parser(name).add_argument("session_id")
    pl = sess.add_parser("plane")
    pl.add_argument("session_id")
    pl.add_argument("plane", choices=["m_plane", "s_plane", "cu_plane", "performance"])
    pl.add_argument("result", choices=["passed", "failed"])

    fab = sub.add_parser("fabric").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    fab.add_parser("check")
    fab.add_parser("export")

    st = sub.add_parser("state").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    st.add_parser("snapshot")
    st.add_parser("replay")

    srv = sub.add_parser("serve")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--tokens", required=True, help="token map JSON file")
    return p


def run(args: argparse.Namespace) -> tuple[int, Any, str]:
    """Execute a parsed command; returns (exit code, document, human text)."""
    store = StateStore(args.state_dir)
    eng = store.open()
    g, c = args.group, getattr(args, "cmd", None)

    if g == "plan" and c == "init":
        plan = eng.init_plan(args.cidr)
        return EXIT_OK, plan.to_dict(), f"plan {plan.base} initialized"
    if g == "plan":
        doc = eng.plan_required().to_dict()
        return EXIT_OK, doc, json.dumps(doc, indent=2)
    if g == "site":
        sid = eng.register_site(args.name, args.kind)
        return EXIT_OK, {"id": sid}, sid
    if g == "switch":
        ports = ethernet_ports(args.ports, args.gbps, args.prefix)
        sw = eng.register_switch(args.site, args.model, ports, args.clock)
        return EXIT_OK, {"id": sw}, sw
    if g == "device" and c == "register":
        feats = {k: str(v).split(",") for k, v in _kv(args.feature).items()}
        specs = [PortSpec.parse(s) for s in args.port]
        dev = eng.register_device(args.site, args.owner, args.role, args.kind, specs, feats)
        return EXIT_OK, {"id": dev}, dev
    if g == "device":
        link = eng.add_link(args.port_a, args.port_b, args.kind)
        return EXIT_OK, {"id": link}, link
    if g == "inventory":
        doc = eng.inventory.to_dict()
        return EXIT_OK, doc, eng.inventory.export_inventory()
    if g == "tenant":
        if c == "create":
            t = eng.create_tenant(args.name)
            return EXIT_OK, tenant_document(eng, t), t.block
        if c == "delete":
            eng.delete_tenant(args.name)
            return EXIT_OK, {"id": args.name, "deleted": True}, f"deleted {args.name}"
        doc = tenant_document(eng, eng.tenant(args.name))
        return EXIT_OK, doc, json.dumps(doc, indent=2)
    if g == "session":
        if c == "plan":
            opts = _kv(args.option)
            if args.analog_mode:
                opts["analog_mode"] = args.analog_mode
            if args.impair:
                opts["impair"] = args.impair
            if args.shared:
                opts["shared"] = True
            s = eng.plan_session(args.kind, args.tenant, args.participant, opts)
            return EXIT_OK, session_document(s), s.id
        if c == "verify":
            report = eng.verify(args.session_id)
            doc = session_document(eng.session(args.session_id))
            text = "PASS" if report.passed else _report_text(report)
            return _report_exit(report), doc, text
        if c == "plane":
            cl = eng.advance_plane(args.session_id, args.plane, args.result)
            return EXIT_OK, cl.to_dict(), json.dumps(cl.to_dict())
        if c in ("provision", "teardown"):
            getattr(eng, c)(args.session_id)
        doc = session_document(eng.session(args.session_id))
        return EXIT_OK, doc, f"{doc['id']} {doc['state']}"
    if g == "fabric":
        if c == "check":
            report = eng.check_fabric()
            return _report_exit(report), report.to_dict(), \
                "PASS" if report.passed else _report_text(report)
        docs = driver.export_switch_configs(eng)
        return EXIT_OK, docs, driver.dumps(docs)
    if g == "state":
        if c == "snapshot":
            path = store.snapshot(eng)
            return EXIT_OK, {"snapshot": str(path), "hash": eng.state_hash()}, str(path)
        replayed = store.replay_from_scratch()
        same = replayed.state_hash() == eng.state_hash()
        doc = {"hash": replayed.state_hash(), "matches_live": same}
        return (EXIT_OK if same else EXIT_USAGE), doc, f"{doc['hash']} matches={same}"
    if g == "serve":
        server = serve(Api(eng, TokenMap.load(args.tokens)), args.host, args.port)
        print(f"serving on http://{args.host}:{args.port}", file=sys.stderr)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        return EXIT_OK, {}, ""
    raise UsageError(f"unknown command {g} {c}")


def _report_text(report: VerificationReport) -> str:
    lines = []
    for r in report.intent_results:
        if not r.passed:
            lines.append(f"FAIL {r.label} {r.a} <-> {r.b}: {r.reason}")
    for v in report.isolation_violations:
        where = f"vid {v.vid}" if v.vid is not None else f"route {v.l3_path}"
        lines.append(f"LEAK {v.tenant_a}:{v.endpoint_a} <-> {v.tenant_b}:{v.endpoint_b} via {where}")
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("OTIC_LOG", "WARNING"))
    parser = build_parser()
    as_json = "--json" in (argv if argv is not None else sys.argv[1:])
    try:
        args = parser.parse_args(argv)
        code, doc, text = run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"oticctl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OticError as exc:
        if as_json:
            print(json.dumps({"version": 1, "error": str(exc), "type": type(exc).__name__}))
        else:
            print(f"oticctl: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        print(f"oticctl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        print(json.dumps(doc if isinstance(doc, list) else {"version": 1, **doc}, sort_keys=True))
    elif text:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
