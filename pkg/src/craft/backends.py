"""Agent backends: scripted deterministic agents and an OpenAI-compatible client.

A backend is anything with a label and ``generate(prompt, max_output_tokens)``.
Backends hold no game state; everything they know arrives through the prompt.
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import httpx

from .engine import BlockType, Clarify, Place, Position, Remove, parse_board
from .protocol import format_builder_move
from .views import DirectorId, parse_view, visible_cells


@runtime_checkable
class AgentBackend(Protocol):
    label: str

    def generate(self, prompt: str, max_output_tokens: int) -> str: ...


def _extract_json_object(text: str, marker: str) -> str:
    """The first balanced {...} block after a section marker."""
    start = text.index(marker)
    brace = text.index("{", start)
    depth = 0
    for idx in range(brace, len(text)):
        if text[idx] == "{":
            depth += 1
        elif text[idx] == "}":
            depth -= 1
            if depth == 0:
                return text[brace : idx + 1]
    raise ValueError(f"unbalanced JSON object after {marker!r}")


_CANDIDATE_RE = re.compile(
    r"^\d+\.\s+(PLACE|REMOVE)(?:\s+([a-z]{2}))?\s+@\s+\((\d),(\d)\)\s+layer\s+(\d)"
    r"(?:\s+->\s+\((\d),(\d)\))?\s*$"
)


@dataclass
class ScriptedBuilderBackend:
    """Deterministic builder: always executes the first verified candidate.

    Reads the candidate list straight out of its own prompt; with no
    candidates it asks for clarification instead of guessing.
    """

    label: str = "scripted-builder"

    def generate(self, prompt: str, max_output_tokens: int) -> str:
        marker = "CANDIDATE MOVES (verified physically valid for this turn):"
        section = prompt[prompt.index(marker) + len(marker):]
        section = section.split("DIRECTOR DISCUSSION:")[0]
        for line in section.splitlines():
            m = _CANDIDATE_RE.match(line.strip())
            if not m:
                continue
            action, code, i, j, layer, si, sj = m.groups()
            position = Position(int(i), int(j))
            span = Position(int(si), int(sj)) if si is not None else None
            if action == "PLACE":
                move = Place(BlockType.from_code(code), position, int(layer), span_to=span)
            else:
                move = Remove(position, int(layer), span_to=span)
            return format_builder_move(move, "Executing the first verified candidate move.")
        return format_builder_move(
            Clarify("No verified candidate was listed this turn - which block should I act on?")
        )


@dataclass
class ScriptedDirectorBackend:
    """Deterministic director: reports the first gap between its wall and the board.

    Parses its own prompt for the target view and board state, walks its
    wall bottom layer up and left to right, and describes the first cell
    that does not yet match.
    """

    label: str = "scripted-director"

    _LAYER_NAMES = ("bottom", "middle", "top")
    _CELL_NAMES = ("left", "middle", "right")

    def generate(self, prompt: str, max_output_tokens: int) -> str:
        director = DirectorId(re.search(r"You are Director (D[123])", prompt).group(1))
        view = parse_view(_extract_json_object(prompt, "TARGET VIEW:"))
        board = parse_board(_extract_json_object(prompt, "CURRENT BOARD STATE:"))
        wall = visible_cells(director)

        for layer in range(3):
            for idx, pos in enumerate(wall):
                entry = view.rows[layer][idx]
                stack = board.stack(pos)
                actual = stack[layer].block.color.value if layer < len(stack) else None
                expected = None if entry.color == "none" else entry.color
                if expected == actual:
                    continue
                where = f"the {self._CELL_NAMES[idx]} of my {self._LAYER_NAMES[layer]} layer"
                if expected is None:
                    message = f"Remove the {actual} block from {where}."
                elif actual is None:
                    size_word = "large" if entry.size == 2 else "small"
                    message = f"Place a {size_word} {expected} block on {where}."
                else:
                    message = f"The block on {where} should be {expected}, not {actual}."
                analysis = (
                    f"Comparing my wall to the board, the first mismatch is at {pos.key()} "
                    f"layer {layer}: expected {expected or 'empty'}, found {actual or 'empty'}."
                )
                return f"<analysis>{analysis}</analysis>\n<message>{message}</message>"

        return (
            "<analysis>Every cell on my wall matches the board.</analysis>\n"
            "<message>My wall looks complete; please follow the other directors.</message>"
        )


@dataclass
class OpenAICompatibleBackend:
    """Chat-completions client for any OpenAI-compatible endpoint.

    Credentials come from the environment (``api_key_env``); transient
    failures retry with exponential backoff before giving up.
    """

    model: str
    base_url: str = "https://api.openai.com/v1"
    temperature: float = 0.7
    timeout: float = 60.0
    retries: int = 2
    api_key_env: str = "CRAFT_API_KEY"

    @property
    def label(self) -> str:
        return self.model

    def generate(self, prompt: str, max_output_tokens: int) -> str:
        api_key = os.environ.get(self.api_key_env) or os.environ.get("OPENAI_API_KEY")
        if not api_key:
            raise RuntimeError(f"no API key in ${self.api_key_env} or $OPENAI_API_KEY")
        url = f"{self.base_url.rstrip('/')}/chat/completions"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "max_tokens": max_output_tokens,
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = httpx.post(url, json=payload, headers=headers, timeout=self.timeout)
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"] or ""
            except Exception as exc:  # noqa: BLE001 - any transport/shape error retries
                last_error = exc
                if attempt < self.retries:
                    time.sleep(0.5 * 2**attempt)
        raise RuntimeError(f"backend {self.model} failed after {self.retries + 1} attempts: {last_error}")


def build_backend(spec: dict) -> AgentBackend:
    """Construct a backend from a config-file entry."""
    kind = spec.get("kind")
    if kind == "scripted-director":
        return ScriptedDirectorBackend()
    if kind == "scripted-builder":
        return ScriptedBuilderBackend()
    if kind == "mock-judge":
        from .evaluation import MockJudgeBackend

        return MockJudgeBackend()
    if kind == "openai-compatible":
        return OpenAICompatibleBackend(
            model=spec["model"],
            base_url=spec.get("base_url", "https://api.openai.com/v1"),
            temperature=spec.get("temperature", 0.7),
            timeout=spec.get("timeout", 60.0),
            retries=spec.get("retries", 2),
            api_key_env=spec.get("api_key_env", "CRAFT_API_KEY"),
        )
    raise ValueError(f"unknown backend kind {kind!r}")


def backend_to_spec(backend: AgentBackend) -> dict:
    """A loggable description of a backend (never includes credentials)."""
    if isinstance(backend, OpenAICompatibleBackend):
        return {
            "kind": "openai-compatible",
            "model": backend.model,
            "base_url": backend.base_url,
            "temperature": backend.temperature,
        }
    kind = {
        "ScriptedDirectorBackend": "scripted-director",
        "ScriptedBuilderBackend": "scripted-builder",
        "MockJudgeBackend": "mock-judge",
    }.get(type(backend).__name__, type(backend).__name__)
    return {"kind": kind, "label": backend.label}
