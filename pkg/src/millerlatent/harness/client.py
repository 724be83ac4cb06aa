"""HTTP client for a model endpoint.

A request is one JSON document holding the prompt text and the attached
assets as base64. Two wire shapes are supported through small adapters:

``simple``
    ``POST {base_url}/generate`` with
    ``{"model", "prompt", "assets": [{"name", "media_type", "data"}], "metadata"}``;
    the reply is ``{"text": ...}``.
``openai-chat``
    ``POST {base_url}/chat/completions`` with a single user message whose
    content mixes text and ``data:`` URL parts; the reply text is
    ``choices[0].message.content``.
"""
from __future__ import annotations

import base64
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import httpx

from ..errors import CredentialMissing, EndpointUnreachable

__all__ = ["RetryPolicy", "ModelEndpointConfig", "EndpointClient", "CallError", "ADAPTERS", "media_type"]

_MEDIA = {".svg": "image/svg+xml", ".obj": "model/obj", ".png": "image/png", ".json": "application/json"}


def media_type(name):
    return _MEDIA.get(Path(name).suffix.lower(), "application/octet-stream")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff: float = 0.5
    factor: float = 2.0

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        if self.backoff < 0 or self.factor < 1:
            raise ValueError("backoff must be >= 0 and factor >= 1")

    def delay(self, attempt):
        """Sleep before retry number ``attempt`` (1-based)."""
        return self.backoff * self.factor ** (attempt - 1)


@dataclass(frozen=True)
class ModelEndpointConfig:
    """Where and how to reach a model.

    ``credential_env`` names an environment variable holding a bearer
    token. The token itself is never stored on this object.
    """

    base_url: str
    model: str = "mock"
    credential_env: str | None = None
    timeout: float = 30.0
    max_concurrent: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    adapter: str = "simple"

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be at least 1")
        if self.adapter not in ADAPTERS:
            raise ValueError(f"unknown adapter {self.adapter!r}; choose from {sorted(ADAPTERS)}")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown endpoint config keys: {sorted(unknown)}")
        if isinstance(d.get("retry"), dict):
            d["retry"] = RetryPolicy(**d["retry"])
        return cls(**d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self):
        return asdict(self)

    def credential(self):
        if not self.credential_env:
            return None
        token = os.environ.get(self.credential_env)
        if not token:
            raise CredentialMissing(f"environment variable {self.credential_env} is not set")
        return token


def _simple_request(cfg, prompt, assets, metadata):
    body = {
        "model": cfg.model,
        "prompt": prompt,
        "assets": [{"name": n, "media_type": media_type(n), "data": d} for n, d in assets],
        "metadata": metadata,
    }
    return "/generate", body


def _simple_reply(payload):
    return payload["text"]


def _chat_request(cfg, prompt, assets, metadata):
    content = [{"type": "text", "text": prompt}]
    for name, data in assets:
        content.append({"type": "image_url", "image_url": {"url": f"data:{media_type(name)};base64,{data}"}})
    body = {"model": cfg.model, "messages": [{"role": "user", "content": content}], "metadata": metadata}
    return "/chat/completions", body


def _chat_reply(payload):
    return payload["choices"][0]["message"]["content"]


ADAPTERS = {
    "simple": (_simple_request, _simple_reply),
    "openai-chat": (_chat_request, _chat_reply),
}


class CallError(Exception):
    """A single request failed after all retries; ``connect`` marks transport-level failure."""

    def __init__(self, message, attempts, connect):
        super().__init__(message)
        self.attempts = attempts
        self.connect = connect


class EndpointClient:
    """Thread-safe wrapper around one ``httpx.Client``."""

    def __init__(self, config: ModelEndpointConfig, transport=None, sleep=time.sleep):
        self.config = config
        headers = {"Content-Type": "application/json"}
        token = config.credential()
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._http = httpx.Client(
            base_url=config.base_url.rstrip("/"), timeout=config.timeout, headers=headers, transport=transport
        )
        self._sleep = sleep

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def complete(self, prompt, assets=(), metadata=None):
        """Send one prompt; return ``(text, attempts)`` or raise :class:`CallError`.

        ``assets`` is a sequence of ``(name, raw_bytes)``. Connection errors,
        timeouts, 429 and 5xx responses are retried; other 4xx are not.
        """
        build, reply = ADAPTERS[self.config.adapter]
        encoded = [(n, base64.b64encode(b).decode("ascii")) for n, b in assets]
        path, body = build(self.config, prompt, encoded, metadata or {})
        policy = self.config.retry
        last, connect = "no attempt made", False
        for attempt in range(1, policy.max_attempts + 1):
            if attempt > 1:
                self._sleep(policy.delay(attempt - 1))
            try:
                r = self._http.post(path, json=body)
            except httpx.TransportError as exc:
                last, connect = f"{type(exc).__name__}: {exc}", True
                continue
            if r.status_code == 429 or r.status_code >= 500:
                last, connect = f"HTTP {r.status_code}", False
                continue
            if r.status_code >= 400:
                raise CallError(f"HTTP {r.status_code}: {r.text[:200]}", attempt, False)
            try:
                return str(reply(r.json())), attempt
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise CallError(f"malformed reply: {exc}", attempt, False) from None
        raise CallError(last, policy.max_attempts, connect)


def unreachable(message, results):
    exc = EndpointUnreachable(message)
    exc.results = results
    return exc
