"""
Shared base for validated, immutable configuration models.
"""

from pydantic import BaseModel, ConfigDict, ValidationError

from .exceptions import ConfigError


class ValidatedModel(BaseModel):
    """Frozen pydantic model that reports validation failures as ConfigError."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    def __init__(self, **data):
        try:
            super().__init__(**data)
        except ValidationError as exc:
            messages = "; ".join(
                f"{'.'.join(str(part) for part in err['loc']) or type(self).__name__}: {err['msg']}"
                for err in exc.errors()
            )
            raise ConfigError(f"invalid {type(self).__name__}: {messages}") from exc
