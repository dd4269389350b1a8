import json

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "lab",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("lab")


def _run(name, tmp_path_factory, **kwargs):
    from poisson_lab.scenarios import build_scenario, run_scenario

    out = tmp_path_factory.mktemp(name.replace("-", "_"))
    cfg = build_scenario(name, **kwargs)
    manifest = run_scenario(cfg, out)
    with open(out / "report.json", "r", encoding="utf-8") as fh:
        report = json.load(fh)
    return {"cfg": cfg, "manifest": manifest, "out": out, "report": report}


@pytest.fixture(scope="session")
def s1_run(tmp_path_factory):
    return _run("s1-opial-scalar", tmp_path_factory)


@pytest.fixture(scope="session")
def s3_run(tmp_path_factory):
    return _run("s3-coop-2d", tmp_path_factory)


@pytest.fixture(scope="session")
def s4_run(tmp_path_factory):
    return _run("s4-dde-linear", tmp_path_factory)


@pytest.fixture(scope="session")
def s5_run(tmp_path_factory):
    return _run("s5-rd-scalar", tmp_path_factory)


@pytest.fixture(scope="session")
def levitan_run(tmp_path_factory):
    return _run("levitan", tmp_path_factory)


def check(run, name):
    entry = run["manifest"].summary[name]
    return entry["status"], entry["value"], entry["detail"]
