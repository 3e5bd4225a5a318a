from fractions import Fraction

import httpx
import pytest
from fastapi.testclient import TestClient

from harness_lab.helpers.helper import cors_origins
from harness_lab.main import app

CASE1 = {"A": "0", "B": "1/2", "C": "-4", "N": 4}


@pytest.fixture
def client():
    return TestClient(app)


def test_law(client):
    response = client.post("/law/", json={**CASE1, "t": "1"})
    assert response.status_code == 200
    rows = response.json()
    assert [row["state"] for row in rows] == [0, 1, 2, 3, 4]
    assert sum(Fraction(row["weight"]) for row in rows) == 1


def test_law_rejects_invalid_parameters(client):
    response = client.post("/law/", json={**CASE1, "C": "0"})
    assert response.status_code == 400
    assert "invalid parameters" in response.json()["detail"]


def test_law_rejects_malformed_rationals(client):
    response = client.post("/law/", json={**CASE1, "A": "zero"})
    assert response.status_code == 422


def test_params(client):
    response = client.post("/params/", json=CASE1)
    assert response.status_code == 200
    summary = response.json()
    assert (summary["sigma"], summary["tau"], summary["gamma"]) == ("2/13", "2/13", "17/13")
    assert summary["domain"] == "(0, 1)"


def test_simulate(client):
    body = {**CASE1, "grid": ["0", "1"], "paths": 2, "seed": 4}
    first = client.post("/simulate/", json=body)
    assert first.status_code == 200
    assert len(first.json()) == 4
    assert first.json() == client.post("/simulate/", json=body).json()


def test_verify_identities(client, small_config):
    response = client.post("/verify/identities", json=small_config.model_dump(), params={"seed": 2})
    assert response.status_code == 200
    report = response.json()
    assert report["seed"] == 2
    assert report["summary"]["failed"] == 0


def test_verify_unknown_suite(client):
    response = client.post("/verify/everything")
    assert response.status_code == 422


async def test_params_async():
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as client:
        response = await client.post("/params/", json={**CASE1, "k_chain": 1})
    assert response.status_code == 200
    summary = response.json()
    assert summary["case"] == "K-chain"
    assert (summary["sigma"], summary["tau"], summary["gamma"]) == ("0", "1", "1")


def test_cors_origins(monkeypatch):
    monkeypatch.delenv("HARNESS_LAB_CORS_ORIGINS", raising=False)
    assert cors_origins() == ["http://localhost:8000"]
    monkeypatch.setenv("HARNESS_LAB_CORS_ORIGINS", "http://a, http://b,")
    assert cors_origins() == ["http://a", "http://b"]


def test_cors_rejects_unknown_origins(client):
    response = client.post("/params/", json=CASE1, headers={"Origin": "http://localhost:8888"})
    assert response.status_code == 200
    assert "access-control-allow-origin" not in response.headers
