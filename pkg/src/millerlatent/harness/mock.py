"""Offline stand-in for a model endpoint.

:class:`MockResponder` answers from the manifest ground truth, looked up
through the ``sample_id`` and ``task`` carried in request metadata.
It can be mounted in-process as an ``httpx.MockTransport`` or served over
real HTTP by :class:`MockServer`; both speak the wire shapes in
:mod:`.client`.
"""
from __future__ import annotations

import hashlib
import json
import random
import threading
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import httpx

from .prompts import Task

__all__ = ["MockResponder", "MockServer", "MODES"]

MODES = ("echo", "invert", "random-family", "maybe")
_FAMILIES = ("{100}", "{110}", "{111}")


class MockResponder:
    """Canned answers keyed on manifest truth.

    Modes
    -----
    echo
        Always the true answer.
    invert
        Always wrong: flipped bits and a different family.
    random-family
        Inference answers drawn uniformly from {100}, {110}, {111}
        (seeded per sample); other tasks echo.
    maybe
        Replies "maybe" to everything.
    """

    def __init__(self, manifest, mode="echo", seed=0, flaky=0, token=None):
        if mode not in MODES:
            raise ValueError(f"unknown mock mode {mode!r}; choose from {MODES}")
        self.truth = {rec["id"]: rec["truth"] for rec in manifest}
        self.mode = mode
        self.seed = seed
        self.flaky = flaky
        self.token = token
        self._seen = Counter()
        self._lock = threading.Lock()

    def _family(self, sid, truth):
        true = truth["family"]
        if self.mode == "random-family":
            h = hashlib.sha256(f"{self.seed}:{sid}".encode()).digest()
            return random.Random(h).choice(_FAMILIES)
        if self.mode == "invert":
            return next(f for f in _FAMILIES if f != true)
        return true

    def answer(self, sample_id, task):
        truth = self.truth.get(sample_id)
        if truth is None or self.mode == "maybe":
            return "maybe"
        task = Task(task)
        flip = self.mode == "invert"
        if task is Task.INFERENCE:
            fam = self._family(sample_id, truth)
            return f"The plane family is {fam}, judging by the edge count and angles of the fragment."
        if task is Task.APPLICABILITY:
            if bool(truth["applicable"]) != flip:
                return "Yes. Miller indices are applicable: the surface is made of flat crystallographic facets."
            return "No. Miller indices are not applicable to this curved, non-crystallographic surface."
        if bool(truth["consistent"]) != flip:
            return "The fragment is consistent with the highlighted plane."
        return "The fragment is inconsistent with the highlighted plane."

    def handle(self, path, body, headers):
        """``(status, payload)`` for one request."""
        if self.token is not None and headers.get("authorization") != f"Bearer {self.token}":
            return 401, {"error": "unauthorized"}
        meta = body.get("metadata") or {}
        key = (meta.get("sample_id"), meta.get("task"))
        with self._lock:
            self._seen[key] += 1
            count = self._seen[key]
        if count <= self.flaky:
            return 503, {"error": "try again"}
        try:
            text = self.answer(meta.get("sample_id"), meta.get("task", "Inference"))
        except (ValueError, KeyError):
            text = "maybe"
        if path.endswith("/chat/completions"):
            return 200, {"choices": [{"message": {"role": "assistant", "content": text}}]}
        if path.endswith("/generate"):
            return 200, {"text": text}
        return 404, {"error": f"no route {path}"}

    def transport(self):
        """An ``httpx.MockTransport`` serving this responder in-process."""

        def _handler(request: httpx.Request):
            try:
                body = json.loads(request.content or b"{}")
            except ValueError:
                return httpx.Response(400, json={"error": "bad json"})
            status, payload = self.handle(request.url.path, body, request.headers)
            return httpx.Response(status, json=payload)

        return httpx.MockTransport(_handler)


class MockServer:
    """Threaded HTTP server on localhost; use as a context manager.

    >>> with MockServer(MockResponder(records)) as srv:   # doctest: +SKIP
    ...     cfg = ModelEndpointConfig(srv.url)
    """

    def __init__(self, responder: MockResponder, host="127.0.0.1", port=0):
        responder_ref = responder

        class _Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length") or 0)
                try:
                    body = json.loads(self.rfile.read(length) or b"{}")
                except ValueError:
                    status, payload = 400, {"error": "bad json"}
                else:
                    hdrs = {k.lower(): v for k, v in self.headers.items()}
                    status, payload = responder_ref.handle(self.path, body, hdrs)
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.responder = responder
        self._server = ThreadingHTTPServer((host, port), _Handler)
        self._server.daemon_threads = True
        self._thread = None

    @property
    def url(self):
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self):
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join()

    def serve_forever(self):
        try:
            self._server.serve_forever()
        finally:
            self._server.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
