"""Inference client interfaces: remote services plus offline mock fixtures.

Remote payloads carry frames and spectrograms as base64-encoded arrays with
shape metadata. Mock clients replay transcripts from a fixture file keyed by
the SHA-256 digest of the canonical request payload, which makes end-to-end
runs fully deterministic and offline-testable.
"""

from __future__ import annotations

import base64
import hashlib
import json
import time
from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np
import requests

from .errors import ClientUnavailableError, ResponseEmptyError


def encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr)
    return {
        "shape": list(arr.shape),
        "dtype": str(arr.dtype),
        "data_b64": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def mllm_request_payload(prompt: str, frames, spectrograms) -> dict:
    return {
        "prompt": prompt,
        "frames": [encode_array(f) for f in frames],
        "spectrograms": [encode_array(s) for s in spectrograms],
    }


def request_digest(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _retrying_post(session, endpoint, payload, *, timeout_s, max_attempts, backoff_s, headers):
    last_exc = None
    for attempt in range(max_attempts):
        if attempt:
            time.sleep(backoff_s * 2 ** (attempt - 1))
        try:
            resp = session.post(endpoint, json=payload, timeout=timeout_s, headers=headers)
            if resp.status_code >= 500:
                last_exc = ClientUnavailableError(
                    f"{endpoint} returned {resp.status_code}"
                )
                continue
            resp.raise_for_status()
            return resp.json()
        except (requests.RequestException, ValueError) as exc:
            last_exc = exc
    raise ClientUnavailableError(f"{endpoint} unreachable after {max_attempts} attempts: {last_exc}")


class MllmClient(ABC):
    """Multimodal model: frames + spectrograms + prompt -> descriptive text."""

    deterministic = False

    @abstractmethod
    def generate(self, prompt: str, frames, spectrograms) -> str: ...


class LlmClient(ABC):
    """Text-only judge model: prompt -> reply text."""

    deterministic = False

    @abstractmethod
    def complete(self, prompt: str) -> str: ...


class RemoteMllmClient(MllmClient):
    def __init__(self, endpoint, auth_token=None, timeout_s=120.0, max_attempts=3, backoff_s=1.0):
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self.max_attempts = max_attempts
        self.backoff_s = backoff_s
        self.headers = {"Authorization": f"Bearer {auth_token}"} if auth_token else {}
        self._session = requests.Session()

    def generate(self, prompt: str, frames, spectrograms) -> str:
        body = _retrying_post(
            self._session,
            self.endpoint,
            mllm_request_payload(prompt, frames, spectrograms),
            timeout_s=self.timeout_s,
            max_attempts=self.max_attempts,
            backoff_s=self.backoff_s,
            headers=self.headers,
        )
        text = body.get("text", "")
        if not text.strip():
            raise ResponseEmptyError(f"{self.endpoint} returned an empty response")
        return text


class RemoteLlmClient(LlmClient):
    def __init__(self, endpoint, auth_token=None, timeout_s=60.0, max_attempts=3, backoff_s=1.0):
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self.max_attempts = max_attempts
        self.backoff_s = backoff_s
        self.headers = {"Authorization": f"Bearer {auth_token}"} if auth_token else {}
        self._session = requests.Session()

    def complete(self, prompt: str) -> str:
        body = _retrying_post(
            self._session,
            self.endpoint,
            {"prompt": prompt},
            timeout_s=self.timeout_s,
            max_attempts=self.max_attempts,
            backoff_s=self.backoff_s,
            headers=self.headers,
        )
        text = body.get("text", "")
        if not text.strip():
            raise ResponseEmptyError(f"{self.endpoint} returned an empty response")
        return text


class MockMllmClient(MllmClient):
    """Replays canned responses keyed by request digest; records every call."""

    deterministic = True

    def __init__(self, fixtures: dict[str, str] | str | Path):
        if not isinstance(fixtures, dict):
            fixtures = json.loads(Path(fixtures).read_text())
        self.fixtures = dict(fixtures)
        self.calls: list[dict] = []

    def generate(self, prompt: str, frames, spectrograms) -> str:
        digest = request_digest(mllm_request_payload(prompt, frames, spectrograms))
        self.calls.append(
            {"digest": digest, "n_frames": len(frames), "n_spectrograms": len(spectrograms)}
        )
        if digest not in self.fixtures:
            raise ClientUnavailableError(f"no fixture transcript for request {digest}")
        return self.fixtures[digest]


class MockLlmClient(LlmClient):
    """Replays canned replies keyed by the digest of the prompt text."""

    deterministic = True

    def __init__(self, fixtures: dict[str, str] | str | Path):
        if not isinstance(fixtures, dict):
            fixtures = json.loads(Path(fixtures).read_text())
        self.fixtures = dict(fixtures)
        self.calls: list[str] = []

    @staticmethod
    def prompt_digest(prompt: str) -> str:
        return hashlib.sha256(prompt.encode("utf-8")).hexdigest()

    def complete(self, prompt: str) -> str:
        digest = self.prompt_digest(prompt)
        self.calls.append(digest)
        if digest not in self.fixtures:
            raise ClientUnavailableError(f"no fixture reply for prompt {digest}")
        return self.fixtures[digest]
