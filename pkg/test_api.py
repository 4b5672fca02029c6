"""
Test the HTTP service with FastAPI's TestClient
"""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from fastapi.testclient import TestClient

from app.main import app

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_colored_jones_endpoint():
    response = client.get("/knots/1/jones/2")
    assert response.status_code == 200
    assert response.json() == {"p": 1, "n": 2, "sequence": "jones", "value": "q + q^3 - q^4"}


def test_jhat_endpoint():
    response = client.get("/knots/1/jhat/1")
    assert response.status_code == 200
    assert response.json()["value"] == "-q^2"


def test_unknot_rejected():
    assert client.get("/knots/0/jones/1").status_code == 400
    assert client.post("/verification/verify", json={"p": 0}).status_code == 422


def test_n_out_of_range():
    assert client.get("/knots/1/jones/-1").status_code == 400


def test_recursion_endpoint_caches():
    first = client.get("/knots/1/recursion", params={"mode": "symbolic"})
    assert first.status_code == 200
    assert first.json()["order"] == 1
    second = client.get("/knots/1/recursion", params={"mode": "symbolic"})
    assert second.status_code == 200
    assert second.json()["cached"]
    assert second.json()["coeffs"] == first.json()["coeffs"]


def test_specialize_endpoint():
    response = client.get("/knots/1/specialize", params={"mode": "symbolic"})
    assert response.status_code == 200
    assert not response.json()["degree_drop"]


def test_step_endpoint_rejects_mixed_sides():
    response = client.get("/verification/step/-1")
    assert response.status_code == 400
    assert response.json()["detail"]["error"] == "DomainError"


def test_genfun_endpoint():
    response = client.get("/verification/genfun", params={"p": 1, "k_max": 2, "n": 6})
    assert response.status_code == 200
    assert response.json()["passed"]


def test_verify_endpoint():
    response = client.post("/verification/verify", json={"p": 1, "nmax": 8, "mode": "symbolic"})
    assert response.status_code == 200
    body = response.json()
    assert body["passed"]
    assert body["order"] == 1
    assert body["status"] == "passed"
    assert body["annihilation"]["skipped_n"] == []


def test_verify_endpoint_pointwise():
    response = client.post("/verification/verify", json={"p": 1, "nmax": 8, "mode": "pointwise"})
    assert response.status_code == 200
    body = response.json()
    assert body["passed"]
    assert body["fixture"]["method"] == "certified"
