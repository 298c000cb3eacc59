"""Chat-completion text generator speaking the common /chat/completions wire
format. The API key is resolved from an environment variable at instantiation
and never stored in configs or documents."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import requests

from layerlab.errors import ConfigValidationError, RemoteServiceError
from layerlab.predictors.base import (
    GenerationMessage,
    ParseFailure,
    TextGenerationPredictor,
    extract_first_json_value,
    postprocess_to_record,
)

PLACEHOLDER = "{entity_text}"


@dataclass
class ChatConfig:
    endpoint_url: str
    model: str
    api_key_env: str
    system_prompt: str = ""
    user_prompt_template: str = PLACEHOLDER
    temperature: float = 0.0
    timeout_s: int = 60
    postprocess: str = "whole_json"  # or "first_json"

    def __post_init__(self):
        if self.user_prompt_template.count(PLACEHOLDER) != 1:
            raise ConfigValidationError(
                f"user_prompt_template must contain {PLACEHOLDER} exactly once",
                fields={"user_prompt_template": f"must contain {PLACEHOLDER} exactly once"},
            )
        if self.postprocess not in ("whole_json", "first_json"):
            raise ConfigValidationError(
                "postprocess must be whole_json or first_json",
                fields={"postprocess": "must be whole_json or first_json"},
            )


class ChatCompletionPredictor(TextGenerationPredictor):
    name = "chat"

    def __init__(self, config: ChatConfig):
        self.config = config
        key = os.environ.get(config.api_key_env, "")
        if not key:
            raise ConfigValidationError(
                f"environment variable {config.api_key_env!r} is unset; cannot "
                "resolve the API key",
                fields={"api_key_env": "environment variable unset"},
            )
        self._api_key = key

    def build_message(self, entity_text: str) -> GenerationMessage:
        user = self.config.user_prompt_template.replace(PLACEHOLDER, entity_text)
        if not user:
            raise ValueError("user message empty after substitution")
        return GenerationMessage(system=self.config.system_prompt, user=user)

    def request_body(self, entity_text: str) -> bytes:
        """Byte-stable request payload for a fixed config and text."""
        message = self.build_message(entity_text)
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": message.system},
                {"role": "user", "content": message.user},
            ],
        }
        return json.dumps(body, ensure_ascii=False, sort_keys=True,
                          separators=(",", ":")).encode("utf-8")

    def generate(self, entity_text: str) -> str:
        url = self.config.endpoint_url.rstrip("/") + "/chat/completions"
        body = self.request_body(entity_text)
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {self._api_key}",
        }
        last_exc: Exception | None = None
        for attempt in range(2):  # one retry on timeout
            try:
                response = requests.post(
                    url, data=body, headers=headers, timeout=self.config.timeout_s
                )
                break
            except requests.Timeout as exc:
                last_exc = exc
        else:
            raise RemoteServiceError(f"chat endpoint timed out twice: {last_exc}")
        if response.status_code != 200:
            excerpt = response.text[:200]
            raise RemoteServiceError(
                f"chat endpoint returned {response.status_code}: {excerpt}",
                status=response.status_code,
            )
        try:
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise RemoteServiceError(f"malformed chat response: {exc}") from exc

    def postprocess(self, response: str) -> dict | list | ParseFailure:
        if self.config.postprocess == "first_json":
            return extract_first_json_value(response)
        return postprocess_to_record(response)
