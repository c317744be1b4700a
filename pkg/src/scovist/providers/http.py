"""JSON-over-HTTP provider backend.

All five capabilities share one wire protocol (POST, JSON bodies)::

    /v1/caption      {"image_ref"}                 -> {"caption"}
    /v1/commonsense  {"head", "relation", "k"}     -> {"tails"}
    /v1/concepts     {"image_ref", "k"}            -> {"concepts"}
    /v1/embed        {"texts"}                     -> {"vectors"}
    /v1/generate     {"storyline", "separator", "nucleus_p", "temperature",
                      "max_length", "seed"?}       -> {"story"}

Non-2xx responses carry {"error": message}.
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Callable, Sequence

import requests

from ..errors import EmptyResponseError, NotFoundError, ProviderError, TransportError
from .base import GenerationParams, ProviderEndpointConfig

log = logging.getLogger(__name__)

BACKOFF_BASE = 0.25
BACKOFF_FACTOR = 2.0


class HttpProvider:
    """Retries transport failures and 5xx with exponential backoff; 4xx fail at once.

    At most ``max_in_flight`` requests run concurrently per instance (or per
    shared semaphore when one is passed in).
    """

    def __init__(
        self,
        config: ProviderEndpointConfig,
        session: requests.Session | None = None,
        semaphore: threading.Semaphore | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.session = session or requests.Session()
        self.slots = semaphore or threading.BoundedSemaphore(config.max_in_flight)
        self.sleep = sleep

    def _post(self, route: str, payload: dict, key: str):
        url = self.config.base_url.rstrip("/") + route
        headers = {"Content-Type": "application/json"}
        if self.config.auth_token:
            headers["Authorization"] = f"Bearer {self.config.auth_token}"

        attempts = 0
        while True:
            attempts += 1
            status = None
            try:
                with self.slots:
                    resp = self.session.post(url, json=payload, headers=headers, timeout=self.config.timeout)
                status = resp.status_code
                if status < 400:
                    break
                message = _error_message(resp)
                if status == 404:
                    raise NotFoundError(f"{route}: {message}")
                if status < 500:
                    raise ProviderError(f"{route} rejected request ({status}): {message}")
                failure = f"{route} returned {status}: {message}"
            except (requests.ConnectionError, requests.Timeout) as exc:
                failure = f"{route} transport failure: {exc}"
            if attempts > self.config.max_retries:
                raise TransportError(f"{failure} (after {attempts} attempts)", attempts=attempts, status=status)
            delay = BACKOFF_BASE * BACKOFF_FACTOR ** (attempts - 1)
            log.warning("%s; retrying in %.2fs", failure, delay)
            self.sleep(delay)

        try:
            return resp.json()[key]
        except (ValueError, KeyError, TypeError):
            raise EmptyResponseError(f"{route}: response lacks {key!r}") from None

    def caption(self, image_ref: str) -> str:
        return self._post("/v1/caption", {"image_ref": image_ref}, "caption")

    def commonsense(self, head: str, relation: str, k: int) -> list[str]:
        return self._post("/v1/commonsense", {"head": head, "relation": relation, "k": k}, "tails")

    def concepts(self, image_ref: str, k: int) -> list[str]:
        return self._post("/v1/concepts", {"image_ref": image_ref, "k": k}, "concepts")

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return self._post("/v1/embed", {"texts": list(texts)}, "vectors")

    def generate(self, storyline: str, params: GenerationParams, separator: str) -> str:
        body = {
            "storyline": storyline,
            "separator": separator,
            "nucleus_p": params.nucleus_p,
            "temperature": params.temperature,
            "max_length": params.max_length,
        }
        if params.seed is not None:
            body["seed"] = params.seed
        return self._post("/v1/generate", body, "story")


def _error_message(resp) -> str:
    try:
        return str(resp.json().get("error", resp.reason))
    except (ValueError, AttributeError):
        return resp.reason or "unknown error"
