import random
from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from favornet.api import create_app
from favornet.domain import GeoPoint
from favornet.keywords import SpeakerRole

from conftest import EPOCH

HOME_A = {"latitude": 52.2297, "longitude": 21.0122}
HOME_B = {"latitude": 52.2310, "longitude": 21.0150}
EXPIRES = (EPOCH + timedelta(days=2)).isoformat()


@pytest.fixture
def client(service):
    return TestClient(create_app(service))


def signup(client, email, name, home=None, org=False):
    body = {"email": email, "display_name": name}
    if home:
        body["home_location"] = home
    path = "/api/orgs" if org else "/api/users"
    if org:
        body.pop("home_location", None)
    response = client.post(path, json=body)
    assert response.status_code == 201, response.text
    return response.json()["user"]


def login(client, email):
    response = client.post("/api/sessions", json={"email": email})
    assert response.status_code == 201
    return {"Authorization": f"Bearer {response.json()['token']}"}


@pytest.fixture
def society(client):
    anna = signup(client, "anna@example.pl", "Anna", HOME_A)
    jan = signup(client, "jan@example.pl", "Jan", HOME_B)
    org = signup(client, "centrum@example.pl", "Centrum", org=True)
    return {
        "anna": (anna, login(client, "anna@example.pl")),
        "jan": (jan, login(client, "jan@example.pl")),
        "org": (org, login(client, "centrum@example.pl")),
    }


def post_request(client, headers, **kwargs):
    body = {
        "title": kwargs.pop("title", "Zakupy"),
        "description": kwargs.pop("description", "mleko i chleb"),
        "location": kwargs.pop("location", HOME_A),
        "expires_at": kwargs.pop("expires_at", EXPIRES),
    }
    response = client.post("/api/requests", json=body, headers=headers)
    assert response.status_code == 201, response.text
    return response.json()["request"]


class TestAccountEndpoints:
    def test_signup_normalizes_email(self, client):
        user = signup(client, "  Anna@Example.PL ", "Anna")
        assert user["email"] == "anna@example.pl"

    def test_duplicate_email_409(self, client):
        signup(client, "anna@example.pl", "Anna")
        response = client.post(
            "/api/users", json={"email": "anna@example.pl", "display_name": "Dupe"}
        )
        assert response.status_code == 409
        assert response.json()["code"] == "duplicate_email"

    def test_invalid_email_422(self, client):
        response = client.post(
            "/api/users", json={"email": "no-at-sign", "display_name": "X"}
        )
        assert response.status_code == 422

    def test_unknown_login_404(self, client):
        assert client.post("/api/sessions", json={"email": "x@y.pl"}).status_code == 404

    def test_missing_token_401(self, client):
        assert client.get("/api/users/me").status_code == 401

    def test_expired_token_401(self, client, service, clock):
        signup(client, "anna@example.pl", "Anna")
        headers = login(client, "anna@example.pl")
        clock.advance(hours=25)
        response = client.get("/api/users/me", headers=headers)
        assert response.status_code == 401
        assert response.json()["code"] == "invalid_session"

    def test_profile_shape(self, client, society):
        anna, anna_h = society["anna"]
        jan, _ = society["jan"]
        org, org_h = society["org"]
        assert client.post(f"/api/users/{jan['id']}/verify", headers=org_h).status_code == 201
        response = client.get(f"/api/users/{jan['id']}/profile", headers=anna_h)
        body = response.json()
        assert body["verified"] is True
        assert body["reputation_sum"] == 0
        assert body["grade_counts"] == {"1": 0, "2": 0, "3": 0, "4": 0, "5": 0}
        assert body["grade_colors"] == {
            "1": "red", "2": "red", "3": "gray", "4": "green", "5": "green",
        }

    def test_verify_requires_org_session(self, client, society):
        anna, anna_h = society["anna"]
        jan, _ = society["jan"]
        response = client.post(f"/api/users/{jan['id']}/verify", headers=anna_h)
        assert response.status_code == 403

    def test_profile_of_unknown_user_404(self, client, society):
        _, anna_h = society["anna"]
        assert client.get("/api/users/ghost/profile", headers=anna_h).status_code == 404


class TestRequestEndpoints:
    def test_org_cannot_post_403(self, client, society):
        _, org_h = society["org"]
        body = {
            "title": "x", "description": "", "location": HOME_A, "expires_at": EXPIRES,
        }
        assert client.post("/api/requests", json=body, headers=org_h).status_code == 403

    def test_radius_cap_422(self, client, society):
        _, jan_h = society["jan"]
        response = client.get(
            "/api/requests/nearby",
            params={"lat": 52.23, "lon": 21.01, "radius_m": 200_000},
            headers=jan_h,
        )
        assert response.status_code == 422

    def test_nearby_returns_ordered_bare_list(self, client, society):
        _, anna_h = society["anna"]
        _, jan_h = society["jan"]
        near = post_request(client, anna_h, location=HOME_A)
        far = post_request(
            client, anna_h,
            location={"latitude": 52.27, "longitude": 21.10},
            title="Dalej",
        )
        response = client.get(
            "/api/requests/nearby",
            params={"lat": HOME_A["latitude"], "lon": HOME_A["longitude"], "radius_m": 20_000},
            headers=jan_h,
        )
        results = response.json()
        assert isinstance(results, list)
        assert [r["request_id"] for r in results] == [near["id"], far["id"]]
        assert results[0]["requester_display_name"] == "Anna"

    def test_my_requests_lists_own_only(self, client, society):
        _, anna_h = society["anna"]
        _, jan_h = society["jan"]
        mine = post_request(client, anna_h)
        response = client.get("/api/users/me/requests", headers=anna_h)
        assert [r["id"] for r in response.json()] == [mine["id"]]
        assert client.get("/api/users/me/requests", headers=jan_h).json() == []

    def test_request_detail(self, client, society):
        _, anna_h = society["anna"]
        _, jan_h = society["jan"]
        request = post_request(client, anna_h)
        body = client.get(f"/api/requests/{request['id']}", headers=jan_h).json()
        assert body["request"]["title"] == "Zakupy"
        assert body["requester"]["display_name"] == "Anna"

    def test_cancel_endpoint(self, client, society):
        _, anna_h = society["anna"]
        request = post_request(client, anna_h)
        response = client.post(f"/api/requests/{request['id']}/cancel", headers=anna_h)
        assert response.json()["request"]["status"] == "cancelled"


class TestEngagementEndpoints:
    def accept(self, client, society):
        _, anna_h = society["anna"]
        _, jan_h = society["jan"]
        request = post_request(client, anna_h)
        response = client.post(f"/api/requests/{request['id']}/accept", headers=jan_h)
        assert response.status_code == 201
        return request, response.json()["engagement"], anna_h, jan_h

    def test_accept_and_replay_conflict(self, client, society):
        request, engagement, _, jan_h = self.accept(client, society)
        assert engagement["state"] == "accepted"
        replay = client.post(f"/api/requests/{request['id']}/accept", headers=jan_h)
        assert replay.status_code == 409

    def test_unknown_request_404(self, client, society):
        _, jan_h = society["jan"]
        assert client.post("/api/requests/ghost/accept", headers=jan_h).status_code == 404

    def test_keys_flow_and_verify(self, client, society):
        _, engagement, anna_h, jan_h = self.accept(client, society)
        eid = engagement["id"]
        first = client.post(f"/api/engagements/{eid}/keys", headers=jan_h).json()
        again = client.post(f"/api/engagements/{eid}/keys", headers=anna_h).json()
        assert first == again
        assert first["volunteer_word"] != first["requester_word"]

        wrong = client.post(
            f"/api/engagements/{eid}/verify",
            json={"speaker_role": "volunteer", "spoken": "zupełnie źle"},
            headers=anna_h,
        ).json()
        assert wrong == {"ok": False, "state": "keys_issued"}

        right = client.post(
            f"/api/engagements/{eid}/verify",
            json={"speaker_role": "volunteer", "spoken": f"  {first['volunteer_word'].upper()} "},
            headers=anna_h,
        ).json()
        assert right == {"ok": True, "state": "authenticated"}

    def test_lockout_returns_423(self, client, society):
        _, engagement, anna_h, jan_h = self.accept(client, society)
        eid = engagement["id"]
        client.post(f"/api/engagements/{eid}/keys", headers=jan_h)
        for _ in range(5):
            response = client.post(
                f"/api/engagements/{eid}/verify",
                json={"speaker_role": "volunteer", "spoken": "nie"},
                headers=anna_h,
            )
            assert response.status_code == 200
        locked = client.post(
            f"/api/engagements/{eid}/verify",
            json={"speaker_role": "volunteer", "spoken": "nie"},
            headers=anna_h,
        )
        assert locked.status_code == 423
        assert locked.json()["code"] == "locked_out"

    def test_bad_speaker_role_422(self, client, society):
        _, engagement, anna_h, jan_h = self.accept(client, society)
        client.post(f"/api/engagements/{engagement['id']}/keys", headers=jan_h)
        response = client.post(
            f"/api/engagements/{engagement['id']}/verify",
            json={"speaker_role": "intruder", "spoken": "kot"},
            headers=anna_h,
        )
        assert response.status_code == 422

    def full_flow(self, client, society):
        _, engagement, anna_h, jan_h = self.accept(client, society)
        eid = engagement["id"]
        words = client.post(f"/api/engagements/{eid}/keys", headers=jan_h).json()
        client.post(
            f"/api/engagements/{eid}/verify",
            json={"speaker_role": "volunteer", "spoken": words["volunteer_word"]},
            headers=anna_h,
        )
        done = client.post(f"/api/engagements/{eid}/complete", headers=jan_h)
        assert done.json()["engagement"]["state"] == "completed"
        return eid, anna_h, jan_h

    def test_complete_replay_conflicts(self, client, society):
        eid, _, jan_h = self.full_flow(client, society)
        replay = client.post(f"/api/engagements/{eid}/complete", headers=jan_h)
        assert replay.status_code == 409
        assert replay.json()["code"] == "illegal_transition"

    def test_rating_flow_closes_and_updates_profiles(self, client, society):
        anna, _ = society["anna"]
        jan, _ = society["jan"]
        eid, anna_h, jan_h = self.full_flow(client, society)
        assert (
            client.post(
                f"/api/engagements/{eid}/rate", json={"grade": 5}, headers=jan_h
            ).status_code
            == 201
        )
        repeat = client.post(
            f"/api/engagements/{eid}/rate", json={"grade": 4}, headers=jan_h
        )
        assert repeat.status_code == 409
        assert (
            client.post(
                f"/api/engagements/{eid}/rate", json={"grade": 4}, headers=anna_h
            ).status_code
            == 201
        )
        state = client.get(f"/api/engagements/{eid}", headers=anna_h).json()
        assert state["engagement"]["state"] == "closed"
        anna_profile = client.get(f"/api/users/{anna['id']}/profile", headers=jan_h).json()
        jan_profile = client.get(f"/api/users/{jan['id']}/profile", headers=jan_h).json()
        assert anna_profile["reputation_sum"] == 2
        assert jan_profile["reputation_sum"] == 1
        assert jan_profile["grade_counts"]["4"] == 1

    def test_rate_before_completion_conflicts(self, client, society):
        _, engagement, anna_h, jan_h = self.accept(client, society)
        response = client.post(
            f"/api/engagements/{engagement['id']}/rate", json={"grade": 5}, headers=jan_h
        )
        assert response.status_code == 409

    def test_grade_out_of_range_422(self, client, society):
        eid, _, jan_h = self.full_flow(client, society)
        response = client.post(
            f"/api/engagements/{eid}/rate", json={"grade": 0}, headers=jan_h
        )
        assert response.status_code == 422

    def test_non_party_cannot_view_404_free(self, client, society):
        _, engagement, _, _ = self.accept(client, society)
        _, org_h = society["org"]
        response = client.get(f"/api/engagements/{engagement['id']}", headers=org_h)
        assert response.status_code == 403

    def test_withdraw_reopens(self, client, society):
        request, engagement, anna_h, jan_h = self.accept(client, society)
        response = client.post(
            f"/api/engagements/{engagement['id']}/cancel", headers=jan_h
        )
        assert response.json()["request"]["status"] == "open"


class TestSosEndpoints:
    def test_sos_flow(self, client, society, clock):
        anna, anna_h = society["anna"]
        jan, jan_h = society["jan"]
        _, org_h = society["org"]
        client.post(f"/api/users/{jan['id']}/verify", headers=org_h)

        raised = client.post("/api/sos", json={}, headers=anna_h)
        assert raised.status_code == 201
        body = raised.json()
        assert body["alerted"] == 1
        event_id = body["event"]["id"]

        clock.advance(seconds=10)
        double = client.post("/api/sos", json={}, headers=anna_h).json()
        assert double["event"]["id"] == event_id

        acked = client.post(f"/api/sos/{event_id}/ack", headers=jan_h)
        assert acked.json()["event"]["status"] == "acknowledged"

        polled = client.get(f"/api/sos/{event_id}", headers=anna_h).json()
        assert polled["event"]["acknowledgments"][0]["volunteer_id"] == jan["id"]

        resolved = client.post(f"/api/sos/{event_id}/resolve", headers=anna_h)
        assert resolved.json()["event"]["status"] == "resolved"
        again = client.post(f"/api/sos/{event_id}/resolve", headers=anna_h)
        assert again.status_code == 409

    def test_sos_without_location_422(self, client):
        signup(client, "nomad@example.pl", "Nomad")
        headers = login(client, "nomad@example.pl")
        response = client.post("/api/sos", json={}, headers=headers)
        assert response.status_code == 422
        assert response.json()["code"] == "no_location"

    def test_stranger_cannot_ack_403(self, client, society):
        _, anna_h = society["anna"]
        _, jan_h = society["jan"]  # jan is not verified here
        event_id = client.post("/api/sos", json={}, headers=anna_h).json()["event"]["id"]
        assert client.post(f"/api/sos/{event_id}/ack", headers=jan_h).status_code == 403


class TestApiEqualsModuleBehavior:
    def test_same_sequence_same_snapshot(self, make_service):
        """Driving the platform over HTTP must leave the exact same store as
        calling the service directly."""
        http_service = make_service(keyword_rng=random.Random(1234))
        module_service = make_service(keyword_rng=random.Random(1234))
        client = TestClient(create_app(http_service))

        # HTTP route
        anna = signup(client, "anna@example.pl", "Anna", HOME_A)
        jan = signup(client, "jan@example.pl", "Jan", HOME_B)
        org = signup(client, "centrum@example.pl", "Centrum", org=True)
        anna_h = login(client, "anna@example.pl")
        jan_h = login(client, "jan@example.pl")
        org_h = login(client, "centrum@example.pl")
        client.post(f"/api/users/{jan['id']}/verify", headers=org_h)
        request = post_request(client, anna_h)
        engagement = client.post(
            f"/api/requests/{request['id']}/accept", headers=jan_h
        ).json()["engagement"]
        words = client.post(
            f"/api/engagements/{engagement['id']}/keys", headers=jan_h
        ).json()
        client.post(
            f"/api/engagements/{engagement['id']}/verify",
            json={"speaker_role": "volunteer", "spoken": words["volunteer_word"]},
            headers=anna_h,
        )
        client.post(f"/api/engagements/{engagement['id']}/complete", headers=jan_h)
        client.post(f"/api/engagements/{engagement['id']}/rate", json={"grade": 5}, headers=jan_h)
        client.post(f"/api/engagements/{engagement['id']}/rate", json={"grade": 4}, headers=anna_h)
        client.post("/api/sos", json={}, headers=anna_h)

        # module route, same operations in the same order
        m = module_service
        m_anna = m.register_user("anna@example.pl", "Anna", GeoPoint(**HOME_A))
        m_jan = m.register_user("jan@example.pl", "Jan", GeoPoint(**HOME_B))
        m_org = m.register_user("centrum@example.pl", "Centrum", is_organization=True)
        m.create_session("anna@example.pl")
        m.create_session("jan@example.pl")
        m.create_session("centrum@example.pl")
        m.confirm_profile(m_org, m_jan.id)
        m_request = m.post_request(
            m_anna, "Zakupy", "mleko i chleb", GeoPoint(**HOME_A), EPOCH + timedelta(days=2)
        )
        m_engagement = m.accept_request(m_jan, m_request.id)
        m_pair = m.issue_keys(m_jan, m_engagement.id)
        m.verify_keyword(
            m_anna, m_engagement.id, SpeakerRole.VOLUNTEER, m_pair.volunteer_word
        )
        m.complete(m_jan, m_engagement.id)
        m.rate(m_jan, m_engagement.id, 5)
        m.rate(m_anna, m_engagement.id, 4)
        m.raise_sos(m_anna)

        assert http_service.store.snapshot() == module_service.store.snapshot()
