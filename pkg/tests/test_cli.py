import json

import pytest

from otic.cli import main
from otic.fixtures import two_switch_facility
from otic.persistence import StateStore


@pytest.fixture
def state(tmp_path):
    return str(tmp_path / "state")


def cli(state, *argv):
    return main(["--state-dir", state, *argv])


def cli_json(state, capsys, *argv):
    capsys.readouterr()
    code = main(["--state-dir", state, "--json", *argv])
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def facility_state(state):
    """The two-switch facility written through a journaled store."""
    fac = two_switch_facility(engine=StateStore(state).open())
    return state, fac


def test_tenant_create_prints_block(state, capsys):
    assert cli(state, "plan", "init", "10.77.0.0/16") == 0
    capsys.readouterr()
    assert cli(state, "tenant", "create", "acme") == 0
    assert capsys.readouterr().out.strip() == "10.77.4.0/24"
    code, doc = cli_json(state, capsys, "tenant", "show", "acme")
    assert code == 0 and doc["carved"]["vpn"] == "10.77.4.160/29" and doc["version"] == 1


def test_unknown_subcommand_exits_1(state, capsys):
    assert cli(state, "frobnicate") == 1
    assert cli(state, "tenant", "frobnicate", "x") == 1
    assert cli(state) == 1
    assert "usage" in capsys.readouterr().err


def test_request_errors_exit_1(state, capsys):
    assert cli(state, "tenant", "create", "acme") == 1  # no plan yet
    cli(state, "plan", "init", "10.77.0.0/16")
    assert cli(state, "tenant", "show", "ghost") == 1
    assert cli(state, "plan", "init", "10.0.0.0/8") == 1


def test_exhaustion_exits_4(state, capsys):
    eng = StateStore(state).open()
    eng.init_plan("10.77.0.0/16")
    for i in range(97):
        eng.create_tenant(f"t{i}")
    assert cli(state, "tenant", "create", "overflow") == 4


def test_inventory_commands(state, capsys):
    cli(state, "plan", "init", "10.77.0.0/16")
    cli(state, "tenant", "create", "tenant3")
    code, site = cli_json(state, capsys, "site", "register", "Lab-1", "lab")
    assert code == 0
    code, sw = cli_json(state, capsys, "switch", "register", site["id"], "S5248F-ON",
                        "--ports", "48", "--gbps", "25", "--clock", "t_bc")
    code, ru = cli_json(state, capsys, "device", "register", site["id"], "ru", "--role", "dut",
                        "--owner", "tenant3", "--port", "eth0:ethernet:25", "--port", "ant0:rf_antenna",
                        "--feature", "bandwidth_mhz=100,40")
    assert code == 0
    code, link = cli_json(state, capsys, "device", "link", f"{ru['id']}:eth0", f"{sw['id']}:p1")
    assert code == 0
    assert cli(state, "device", "link", f"{ru['id']}:ant0", f"{sw['id']}:p2") == 1
    code, inv = cli_json(state, capsys, "inventory", "export")
    assert [d["id"] for d in inv["devices"]] == [ru["id"]]
    dev = inv["devices"][0]
    assert dev["features"]["bandwidth_mhz"] == ["100", "40"]


def test_session_lifecycle(facility_state, capsys):
    state, f = facility_state
    code, doc = cli_json(state, capsys, "session", "plan", "du_conformance", "--tenant", "tenant2",
                         "--participant", f["RU-UE-EMU"], "--participant", f["DU2"],
                         "--participant", f["CORE-B"])
    assert code == 0 and doc["state"] == "draft"
    sid = doc["id"]
    assert cli(state, "session", "provision", sid) == 0
    assert cli(state, "session", "verify", sid) == 0
    code, doc = cli_json(state, capsys, "session", "show", sid)
    assert doc["state"] == "active"
    assert cli(state, "session", "plane", sid, "m_plane", "passed") == 0
    assert cli(state, "session", "plane", sid, "cu_plane", "passed") == 1
    assert cli(state, "fabric", "check") == 0
    code, docs = cli_json(state, capsys, "fabric", "export")
    assert {d["switch_id"] for d in docs} == {"sw1", "sw2"}
    assert cli(state, "session", "teardown", sid) == 0
    assert cli(state, "session", "teardown", sid) == 1


def test_session_plan_options(facility_state, capsys):
    state, f = facility_state
    code, doc = cli_json(state, capsys, "session", "plan", "e2e", "--tenant", "tenant1",
                         "--participant", f["UE-EMU"], "--participant", f["RU2"],
                         "--participant", f["DU1"], "--participant", f["CU1"],
                         "--participant", f["CORE-A"], "--analog-mode", "conducted",
                         "--impair", "F1", "--option", "delay_ms=3.5")
    assert code == 0
    assert [i["delay_ms"] for i in doc["topology"]["impairments"]] == [3.5]


def _provisioned(state, f):
    eng = StateStore(state).open()
    s = eng.plan_session("ru_conformance", ["tenant3"], [f["DU-EMU"], f["RU1"], f["VST"]],
                         {"analog_mode": "radiated"})
    eng.provision(s.id)
    return eng, s


def test_intent_failure_exits_2(facility_state, capsys):
    state, f = facility_state
    eng, s = _provisioned(state, f)
    eng.override_port(f"{f['sw-dc']}:p31", "shutdown")
    assert cli(state, "session", "verify", s.id) == 2
    assert "FAIL" in capsys.readouterr().out


def test_isolation_violation_exits_3(facility_state, capsys):
    state, f = facility_state
    eng, s = _provisioned(state, f)
    vid = next(iter(s.allocations.vids.values()))
    # cable-level tamper: put tenant1's DU1 port on tenant3's VID
    eng.override_port(f"{f['sw-dc']}:p2", "access", [vid])
    assert cli(state, "fabric", "check") == 3
    assert "LEAK" in capsys.readouterr().out
    assert cli(state, "session", "verify", s.id) == 3


def test_state_snapshot_and_replay(facility_state, capsys):
    state, f = facility_state
    _provisioned(state, f)
    assert cli(state, "state", "snapshot") == 0
    code, doc = cli_json(state, capsys, "state", "replay")
    assert code == 0 and doc["matches_live"]


def test_json_errors_are_documents(state, capsys):
    capsys.readouterr()
    assert main(["--state-dir", state, "--json", "tenant", "show", "x"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["type"] == "NotFound"
