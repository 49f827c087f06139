"""Model and training configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Any

from .errors import ConfigurationError

NUM_CLASSES = 11

# Default sequence lengths per pre-tokenizer family: whitespace splitting
# produces longer sequences and needs the larger budget.
SEQ_LEN_DIGITS = 512
SEQ_LEN_WHITESPACE = 1024


@dataclass
class ModelConfig:
    seq_len: int = SEQ_LEN_DIGITS
    embed_dim: int = 64
    num_blocks: int = 3
    num_heads: int = 2
    ffn_dim: int = 128
    dropout: float = 0.1
    layernorm_eps: float = 1e-5
    num_classes: int = NUM_CLASSES
    batch_size: int = 64
    learning_rate: float = 1e-5
    optimizer: str = "adamw"
    weight_decay: float = 0.01
    warmup_steps: int = 0
    grad_clip: float = 0.0  # max gradient norm; 0 disables clipping
    max_epochs: int = 50
    patience: int = 5
    seed: int = 0
    # Ablation switches, both off by default: the reference pipeline attends
    # over and pools across every position, padding included.
    padding_aware: bool = False
    scale_embeddings: bool = False

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for name in ("seq_len", "embed_dim", "num_blocks", "num_heads", "ffn_dim",
                     "num_classes", "batch_size", "max_epochs"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.embed_dim % self.num_heads != 0:
            raise ConfigurationError(
                f"embed_dim {self.embed_dim} not divisible by num_heads {self.num_heads}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.layernorm_eps <= 0:
            raise ConfigurationError(f"layernorm_eps must be positive, got {self.layernorm_eps}")
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.optimizer != "adamw":
            raise ConfigurationError(f"unsupported optimizer {self.optimizer!r}")
        if self.patience < 0:
            raise ConfigurationError(f"patience must be >= 0, got {self.patience}")
        if self.warmup_steps < 0:
            raise ConfigurationError(f"warmup_steps must be >= 0, got {self.warmup_steps}")
        if self.grad_clip < 0:
            raise ConfigurationError(f"grad_clip must be >= 0, got {self.grad_clip}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict[str, Any]) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**values)

    def with_overrides(self, **overrides: Any) -> "ModelConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# The bag-of-words baseline trains with a higher learning rate; everything
# else about its optimization protocol matches the transformer for a fair
# comparison.
BOW_LEARNING_RATE = 1e-4


def default_bow_config(**overrides: Any) -> ModelConfig:
    cfg = ModelConfig(learning_rate=BOW_LEARNING_RATE)
    return cfg.with_overrides(**overrides)
