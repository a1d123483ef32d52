"""Line-based smoke-test scripts replayed against a running server.

One call per line, so scripts diff cleanly in version control:

    # comment
    POST /api/users {"email": "anna@example.pl", "display_name": "Anna"} => 201 SAVE anna=user.id
    POST /api/sessions {"email": "anna@example.pl"} => 201 SAVE tok=token
    AUTH tok
    GET /api/users/${anna}/profile => 200 CHECK reputation_sum == 0

Verbs: GET, POST, AUTH. ``SAVE name=dotted.path`` captures a response field,
``${name}`` substitutes it into later lines, ``CHECK dotted.path == literal``
asserts on the response body. Unknown verbs abort before anything runs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import httpx

VERBS = ("GET", "POST", "AUTH")

_VAR_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


class ScenarioParseError(Exception):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ScenarioRuntimeError(Exception):
    pass


@dataclass
class Call:
    line_no: int
    verb: str
    path: str = ""
    body: str | None = None
    expected_status: int = 0
    saves: list[tuple[str, str]] = field(default_factory=list)
    checks: list[tuple[str, str]] = field(default_factory=list)
    auth_var: str | None = None  # AUTH only; None clears


def parse_scenario(text: str) -> list[Call]:
    calls = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        verb = line.split(None, 1)[0]
        if verb not in VERBS:
            raise ScenarioParseError(line_no, f"unknown verb {verb!r}")
        if verb == "AUTH":
            parts = line.split()
            if len(parts) != 2:
                raise ScenarioParseError(line_no, "AUTH takes exactly one variable (or -)")
            calls.append(
                Call(line_no, "AUTH", auth_var=None if parts[1] == "-" else parts[1])
            )
            continue
        if " => " not in line:
            raise ScenarioParseError(line_no, "missing ' => <status>'")
        request_part, outcome_part = line.split(" => ", 1)
        pieces = request_part.split(None, 2)
        if len(pieces) < 2:
            raise ScenarioParseError(line_no, "missing request path")
        path = pieces[1]
        body = pieces[2] if len(pieces) == 3 else None
        tokens = outcome_part.split()
        try:
            expected_status = int(tokens[0])
        except (IndexError, ValueError):
            raise ScenarioParseError(line_no, "expected an integer status after '=>'")
        call = Call(line_no, verb, path, body, expected_status)
        i = 1
        while i < len(tokens):
            if tokens[i] == "SAVE" and i + 1 < len(tokens) and "=" in tokens[i + 1]:
                name, _, json_path = tokens[i + 1].partition("=")
                call.saves.append((name, json_path))
                i += 2
            elif tokens[i] == "CHECK" and i + 3 < len(tokens) and tokens[i + 2] == "==":
                call.checks.append((tokens[i + 1], tokens[i + 3]))
                i += 4
            else:
                raise ScenarioParseError(line_no, f"cannot parse clause at {tokens[i]!r}")
        calls.append(call)
    return calls


def _dig(payload: Any, dotted: str) -> Any:
    value = payload
    for part in dotted.split("."):
        if isinstance(value, list):
            value = value[int(part)]
        elif isinstance(value, dict):
            if part not in value:
                raise KeyError(dotted)
            value = value[part]
        else:
            raise KeyError(dotted)
    return value


def _matches(value: Any, literal: str) -> bool:
    if isinstance(value, bool):
        return literal.lower() == str(value).lower()
    if isinstance(value, (int, float)):
        try:
            return float(literal) == float(value)
        except ValueError:
            return False
    return str(value) == literal


@dataclass
class ScenarioReport:
    total: int = 0
    failed: int = 0

    @property
    def ok(self) -> bool:
        return self.failed == 0


def run_scenario(
    calls: list[Call],
    base_url: str,
    out: Callable[[str], None] = print,
    client: httpx.Client | None = None,
) -> ScenarioReport:
    """Execute calls in order; raises ScenarioRuntimeError if the server is
    unreachable or a saved variable is missing."""
    own_client = client is None
    if client is None:
        client = httpx.Client(base_url=base_url, timeout=10.0)
    variables: dict[str, str] = {}
    token: str | None = None
    report = ScenarioReport()
    try:
        for call in calls:
            if call.verb == "AUTH":
                if call.auth_var is None:
                    token = None
                elif call.auth_var in variables:
                    token = variables[call.auth_var]
                else:
                    raise ScenarioRuntimeError(
                        f"line {call.line_no}: AUTH references unknown variable {call.auth_var!r}"
                    )
                continue

            report.total += 1
            path = _substitute(call.path, variables, call.line_no)
            headers = {"Authorization": f"Bearer {token}"} if token else {}
            content = None
            if call.body is not None:
                content = _substitute(call.body, variables, call.line_no)
                headers["Content-Type"] = "application/json"
            try:
                response = client.request(call.verb, path, content=content, headers=headers)
            except httpx.HTTPError as exc:
                raise ScenarioRuntimeError(f"line {call.line_no}: {exc}") from exc

            problems = []
            if response.status_code != call.expected_status:
                problems.append(
                    f"status {response.status_code}, expected {call.expected_status}"
                )
            payload: Any = None
            if call.saves or call.checks:
                try:
                    payload = response.json()
                except json.JSONDecodeError:
                    problems.append("response body is not JSON")
            if payload is not None:
                for name, json_path in call.saves:
                    try:
                        variables[name] = str(_dig(payload, json_path))
                    except (KeyError, IndexError, ValueError):
                        problems.append(f"SAVE path {json_path!r} not in response")
                for json_path, literal in call.checks:
                    want = _substitute(literal, variables, call.line_no)
                    try:
                        got = _dig(payload, json_path)
                    except (KeyError, IndexError, ValueError):
                        problems.append(f"CHECK path {json_path!r} not in response")
                        continue
                    if not _matches(got, want):
                        problems.append(f"CHECK {json_path} is {got!r}, expected {want!r}")

            label = f"{call.verb} {path}"
            if problems:
                report.failed += 1
                out(f"FAIL line {call.line_no}: {label}")
                for problem in problems:
                    out(f"     {problem}")
                out(f"     body: {response.text[:500]}")
            else:
                out(f"ok   line {call.line_no}: {label} -> {response.status_code}")
    finally:
        if own_client:
            client.close()
    return report


def _substitute(template: str, variables: dict[str, str], line_no: int) -> str:
    def repl(match: re.Match) -> str:
        name = match.group(1)
        if name not in variables:
            raise ScenarioRuntimeError(f"line {line_no}: unknown variable {name!r}")
        return variables[name]

    return _VAR_RE.sub(repl, template)
