"""Small JSON-over-HTTP surface over the engine.

Requests carry ``Authorization: Bearer <token>``. The token file maps one
admin token and one token per tenant::

    {"admin": "s3cret", "tenants": {"tenant1": "t1-token"}}

A tenant token may only read or change that tenant's own resources; it never
sees the fabric as a whole. :meth:`Api.handle` is transport-free so it can be
exercised directly; :func:`serve` binds it to ``http.server``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Mapping, Optional

from otic.driver import export_switch_configs
from otic.errors import NotFound, OticError, ValidationError
from otic.session import Engine, Session, Tenant

logger = logging.getLogger(__name__)

ADMIN = "__admin__"


class HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class TokenMap:
    admin: str
    tenants: dict[str, str] = field(default_factory=dict)  # tenant -> token

    @classmethod
    def load(cls, path: Path | str) -> "TokenMap":
        doc = json.loads(Path(path).read_text())
        return cls(doc["admin"], dict(doc.get("tenants", {})))

    def identify(self, header: Optional[str]) -> str:
        if not header or not header.startswith("Bearer "):
            raise HttpError(401, "missing bearer token")
        token = header[len("Bearer "):].strip()
        if token and token == self.admin:
            return ADMIN
        for tenant, tok in self.tenants.items():
            if token and tok == token:
                return tenant
        raise HttpError(401, "bad token")


def tenant_document(engine: Engine, tenant: Tenant) -> dict:
    tb = engine.plan.tenant_block(tenant.id) if engine.plan else None
    return {
        "version": 1,
        "id": tenant.id,
        "block": tenant.block,
        "carved": {k: str(v) for k, v in tb.carved.items()} if tb else {},
        "sessions": [s.id for s in engine.sessions.values() if tenant.id in s.tenants],
    }


def session_document(session: Session) -> dict:
    return {
        "version": 1,
        "id": session.id,
        "kind": session.kind.value,
        "state": session.state.value,
        "tenants": list(session.tenants),
        "participants": list(session.participants),
        "allocations": session.allocations.to_dict(),
        "topology": session.topology.to_dict(),
        "checklist": session.checklist.to_dict(),
        "report": session.report.to_dict() if session.report else None,
    }


Route = tuple[str, re.Pattern, Callable]


class Api:
    def __init__(self, engine: Engine, tokens: TokenMap):
        self.engine = engine
        self.tokens = tokens
        self.routes: list[Route] = [
            ("POST", re.compile(r"^/plan$"), self._post_plan),
            ("POST", re.compile(r"^/tenants$"), self._post_tenant),
            ("GET", re.compile(r"^/tenants/(?P<tid>[^/]+)$"), self._get_tenant),
            ("POST", re.compile(r"^/devices$"), self._post_device),
            ("POST", re.compile(r"^/links$"), self._post_link),
            ("POST", re.compile(r"^/sessions$"), self._post_session),
            ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)$"), self._get_session),
            ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/(?P<action>provision|verify|teardown)$"),
             self._session_action),
            ("GET", re.compile(r"^/fabric/report$"), self._fabric_report),
            ("GET", re.compile(r"^/configs$"), self._configs),
        ]

    def handle(self, method: str, path: str, headers: Mapping[str, str],
               body: Optional[bytes] = None) -> tuple[int, dict]:
        headers = {k.lower(): v for k, v in headers.items()}
        try:
            who = self.tokens.identify(headers.get("authorization"))
            path = path.split("?", 1)[0].rstrip("/") or "/"
            for verb, pattern, fn in self.routes:
                m = pattern.match(path)
                if m and verb == method:
                    data = _parse_body(body) if method == "POST" else {}
                    return fn(who, data, **m.groupdict())
            raise HttpError(404, f"no route for {method} {path}")
        except HttpError as exc:
            return exc.status, {"version": 1, "error": str(exc)}
        except OticError as exc:
            return exc.http_status, {"version": 1, "error": str(exc),
                                     "type": type(exc).__name__, "rolled_back": True,
                                     "state_hash": self.engine.state_hash()}
        except (ValueError, TypeError, KeyError) as exc:
            return 422, {"version": 1, "error": str(exc), "rolled_back": True}

    # -- authorization helpers -------------------------------------------

    @staticmethod
    def _admin_only(who: str) -> None:
        if who != ADMIN:
            raise HttpError(403, "admin only")

    def _session_for(self, who: str, sid: str, write: bool) -> Session:
        try:
            s = self.engine.session(sid)
        except NotFound:
            if who == ADMIN:
                raise
            raise HttpError(403, "not your session") from None
        if who == ADMIN:
            return s
        allowed = set(s.tenants) == {who} if write else who in s.tenants
        if not allowed:
            raise HttpError(403, "not your session")
        return s

    # -- handlers ---------------------------------------------------------

    def _post_plan(self, who, data):
        self._admin_only(who)
        plan = self.engine.init_plan(_field(data, "base_prefix"))
        return 201, plan.to_dict()

    def _post_tenant(self, who, data):
        self._admin_only(who)
        tenant = self.engine.create_tenant(_field(data, "name"))
        return 201, tenant_document(self.engine, tenant)

    def _get_tenant(self, who, data, tid):
        if who not in (ADMIN, tid):
            raise HttpError(403, "cross-tenant access denied")
        with self.engine.lock:
            return 200, tenant_document(self.engine, self.engine.tenant(tid))

    def _post_device(self, who, data):
        owner = data.get("owner")
        if who != ADMIN and owner != who:
            raise HttpError(403, "tenants may only register their own devices")
        dev_id = self.engine.register_device(
            _field(data, "site"), owner, _field(data, "role"), _field(data, "kind"),
            data.get("ports", []), data.get("features"))
        return 201, {"version": 1, "id": dev_id,
                     **self.engine.inventory.device(dev_id).to_dict()}

    def _post_link(self, who, data):
        self._admin_only(who)
        link_id = self.engine.add_link(_field(data, "port_a"), _field(data, "port_b"),
                                       data.get("kind", "access"))
        return 201, {"version": 1, **self.engine.inventory.links[link_id].to_dict()}

    def _post_session(self, who, data):
        tenants = _field(data, "tenants")
        if who != ADMIN and set(tenants) != {who}:
            raise HttpError(403, "tenants may only plan their own single-tenant sessions")
        s = self.engine.plan_session(_field(data, "kind"), tenants,
                                     _field(data, "participants"), data.get("options"))
        return 201, session_document(s)

    def _get_session(self, who, data, sid):
        with self.engine.lock:
            return 200, session_document(self._session_for(who, sid, write=False))

    def _session_action(self, who, data, sid, action):
        self._session_for(who, sid, write=True)
        if action == "verify":
            report = self.engine.verify(sid)
            return 200, {**session_document(self.engine.session(sid)), "report": report.to_dict()}
        getattr(self.engine, action)(sid)
        return 200, session_document(self.engine.session(sid))

    def _fabric_report(self, who, data):
        self._admin_only(who)
        with self.engine.lock:
            return 200, self.engine.check_fabric().to_dict()

    def _configs(self, who, data):
        self._admin_only(who)
        with self.engine.lock:
            return 200, {"version": 1, "switches": export_switch_configs(self.engine)}


def _parse_body(body: Optional[bytes]) -> dict:
    if not body:
        return {}
    try:
        data = json.loads(body)
    except json.JSONDecodeError as exc:
        raise HttpError(400, f"bad JSON: {exc}") from None
    if not isinstance(data, dict):
        raise HttpError(400, "body must be a JSON object")
    return data


def _field(data: Mapping, name: str):
    if name not in data:
        raise ValidationError(f"missing field {name!r}")
    return data[name]


def make_handler(api: Api) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        def _dispatch(self, method: str) -> None:
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else None
            status, doc = api.handle(method, self.path, dict(self.headers), body)
            payload = json.dumps(doc, sort_keys=True).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def do_GET(self) -> None:
            self._dispatch("GET")

        def do_POST(self) -> None:
            self._dispatch("POST")

        def log_message(self, fmt, *args) -> None:
            logger.info("%s - %s", self.address_string(), fmt % args)

    return Handler


def serve(api: Api, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    """Create (but do not start) a threaded server; call ``serve_forever``."""
    return ThreadingHTTPServer((host, port), make_handler(api))
