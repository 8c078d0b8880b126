"""Conversational backends: live HTTP chat-completions and offline replay.

A backend receives the full prior conversation as a message list and
returns exactly one completion. Replay backends reproduce a recorded
session byte-for-byte and are the default everywhere so tests and CI never
touch a live model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from coarch.errors import (
    BackendUnavailable,
    ContextTooLarge,
    InputMismatch,
    ReplayExhausted,
)


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    content: str


class ChatBackend(Protocol):
    descriptor: str
    deterministic: bool

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        """Return one completion for the given conversation."""
        ...


@dataclass(frozen=True)
class Exchange:
    """One recorded architect/bot pair from a fixture."""

    turn_id: int
    architect: str
    bot: str


class ReplayBackend:
    """Replays recorded bot turns, verifying architect inputs match.

    The cursor advances one exchange per completion; a diverging architect
    input raises InputMismatch naming the first recorded turn that differs.
    """

    deterministic = True

    def __init__(
        self,
        exchanges: Sequence[Exchange],
        descriptor: str,
        *,
        cursor: int = 0,
    ) -> None:
        self._exchanges = list(exchanges)
        self._cursor = cursor
        self.descriptor = descriptor

    @property
    def cursor(self) -> int:
        return self._cursor

    @property
    def remaining(self) -> int:
        return len(self._exchanges) - self._cursor

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        if self._cursor >= len(self._exchanges):
            raise ReplayExhausted(
                f"replay fixture {self.descriptor} has no response left "
                f"(consumed {self._cursor})"
            )
        if not messages or messages[-1].role != "user":
            raise InputMismatch(0, "<architect turn>", "<no user message>")
        expected = self._exchanges[self._cursor]
        got = messages[-1].content
        if got != expected.architect:
            raise InputMismatch(expected.turn_id, expected.architect, got)
        self._cursor += 1
        return expected.bot


class ScriptedBackend:
    """Returns canned responses in order, ignoring the inputs.

    Used to author fixtures and to drive engine tests without a model.
    """

    deterministic = True

    def __init__(self, responses: Sequence[str], descriptor: str = "scripted") -> None:
        self._responses = list(responses)
        self._cursor = 0
        self.descriptor = descriptor
        self.calls: list[list[ChatMessage]] = []

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        self.calls.append(list(messages))
        if self._cursor >= len(self._responses):
            raise ReplayExhausted(
                f"scripted backend has no response left (consumed {self._cursor})"
            )
        response = self._responses[self._cursor]
        self._cursor += 1
        return response


class LiveBackend:
    """HTTP chat-completion endpoint (model, message list, temperature).

    Endpoint URL and credentials come from configuration, never from code.
    """

    deterministic = False

    def __init__(
        self,
        base_url: str,
        api_key: str,
        model: str,
        *,
        temperature: float = 0.7,
        timeout: float = 60.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.temperature = temperature
        self.timeout = timeout
        self.descriptor = f"live:{model}"

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.temperature,
        }
        try:
            response = httpx.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"backend request failed: {exc}") from exc
        if response.status_code == 413:
            raise ContextTooLarge("backend rejected the context as too large")
        if response.status_code >= 400:
            body = response.text[:500]
            if "context" in body.lower() and "length" in body.lower():
                raise ContextTooLarge("backend rejected the context as too large")
            raise BackendUnavailable(
                f"backend returned {response.status_code}: {body}"
            )
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(
                f"backend returned an unexpected payload: {exc}"
            ) from exc
        if not isinstance(content, str):
            raise BackendUnavailable("backend returned a non-text completion")
        return content
