import logging
import threading
import time
from typing import Any, Dict, Optional

import httpx
import orjson
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_none

from services.adapters.base import AdapterConfig, AdapterResponse, AdapterRole, BaseModelAdapter
from services.errors import AdapterUnavailableError, RemoteError, SchemaViolationError

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class _RetryableStatus(Exception):
    def __init__(self, status: int, body: str):
        super().__init__(f"HTTP {status}")
        self.status = status
        self.body = body


class RemoteModelAdapter(BaseModelAdapter):
    """
    JSON-over-HTTP client for one model role.

    Each call POSTs the request body to the configured endpoint. Timeouts,
    transport errors, 429 and 5xx answers are retried up to ``config.retries``
    times; other non-success statuses fail immediately.
    """

    def __init__(
        self,
        role: AdapterRole,
        config: AdapterConfig,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.role = role
        self.config = config
        headers = {"Content-Type": "application/json"}
        if config.api_token:
            headers["Authorization"] = f"Bearer {config.api_token}"
        self.client = httpx.Client(timeout=config.timeout, transport=transport, headers=headers)
        self._in_flight = threading.BoundedSemaphore(config.max_in_flight)
        logger.info(f"Initialized remote {role.value} adapter: {config.endpoint}")

    def close(self):
        self.client.close()

    def _post(self, payload: Dict[str, Any]) -> httpx.Response:
        with self._in_flight:
            response = self.client.post(self.config.endpoint, content=orjson.dumps(payload))
        if response.status_code in RETRYABLE_STATUS:
            raise _RetryableStatus(response.status_code, response.text)
        return response

    def invoke(self, payload: Dict[str, Any]) -> AdapterResponse:
        """
        Send one request.

        Returns:
            AdapterResponse with the decoded body and the number of attempts made

        Raises:
            AdapterUnavailableError: timeouts or transport errors on every attempt
            RemoteError: non-success HTTP status
            SchemaViolationError: body is not a JSON object
        """
        started = time.perf_counter()
        attempts = 0
        retrying = Retrying(
            stop=stop_after_attempt(self.config.retries + 1),
            retry=retry_if_exception_type((httpx.TimeoutException, httpx.TransportError, _RetryableStatus)),
            wait=wait_none(),
            reraise=True,
        )
        try:
            for attempt in retrying:
                with attempt:
                    attempts = attempt.retry_state.attempt_number
                    if attempts > 1:
                        logger.warning(f"Retrying {self.role.value} request (attempt {attempts})")
                    response = self._post(payload)
        except httpx.TimeoutException as e:
            raise AdapterUnavailableError(f"{self.role.value} timed out after {attempts} attempt(s)") from e
        except httpx.TransportError as e:
            raise AdapterUnavailableError(f"{self.role.value} unreachable after {attempts} attempt(s): {e}") from e
        except _RetryableStatus as e:
            raise RemoteError(f"{self.role.value} answered HTTP {e.status} after {attempts} attempt(s)", e.status) from e

        if not response.is_success:
            raise RemoteError(f"{self.role.value} answered HTTP {response.status_code}", response.status_code)
        try:
            body = orjson.loads(response.content)
        except orjson.JSONDecodeError as e:
            raise SchemaViolationError(f"{self.role.value} response is not JSON", raw=response.text) from e
        if not isinstance(body, dict):
            raise SchemaViolationError(f"{self.role.value} response is not a JSON object", raw=body)

        latency = time.perf_counter() - started
        logger.debug(f"{self.role.value} answered in {latency:.3f}s after {attempts} attempt(s)")
        return AdapterResponse(payload=body, latency=latency, attempt_count=attempts)
