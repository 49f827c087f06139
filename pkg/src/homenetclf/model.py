"""Encoder-only transformer classifier over token id sequences.

Pipeline: token + position embeddings -> N post-norm encoder blocks
(multi-head self-attention and a ReLU feed-forward, each wrapped in
dropout + residual + layer norm) -> mean pooling over all positions ->
linear head with softmax over the problem classes.

By default attention and pooling cover every position, padding included;
``ModelConfig.padding_aware`` switches both to respect true lengths for
ablation runs.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import ModelConfig
from .errors import DataFormatError, NumericalDivergenceError
from .pretokenize import PreTokenizerSpec, pretokenize
from .vocab import Vocabulary, encode

INIT_STD = 0.02
PROB_FLOOR = 1e-12


class EncoderBlock(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        dim = config.embed_dim
        self.num_heads = config.num_heads
        self.head_dim = dim // config.num_heads
        self.qkv = nn.Linear(dim, 3 * dim)
        self.attn_out = nn.Linear(dim, dim)
        self.norm_attn = nn.LayerNorm(dim, eps=config.layernorm_eps)
        self.ffn_in = nn.Linear(dim, config.ffn_dim)
        self.ffn_out = nn.Linear(config.ffn_dim, dim)
        self.norm_ffn = nn.LayerNorm(dim, eps=config.layernorm_eps)
        self.dropout = nn.Dropout(config.dropout)

    def attention(self, x: torch.Tensor, keep_mask: torch.Tensor | None) -> torch.Tensor:
        batch, seq_len, dim = x.shape
        q, k, v = self.qkv(x).split(dim, dim=-1)
        q = q.view(batch, seq_len, self.num_heads, self.head_dim).transpose(1, 2)
        k = k.view(batch, seq_len, self.num_heads, self.head_dim).transpose(1, 2)
        v = v.view(batch, seq_len, self.num_heads, self.head_dim).transpose(1, 2)
        attn_mask = None
        if keep_mask is not None:
            attn_mask = keep_mask[:, None, None, :]  # queries may attend only kept keys
        y = F.scaled_dot_product_attention(q, k, v, attn_mask=attn_mask)
        y = y.transpose(1, 2).contiguous().view(batch, seq_len, dim)
        return self.attn_out(y)

    def forward(self, x: torch.Tensor, keep_mask: torch.Tensor | None = None) -> torch.Tensor:
        x = self.norm_attn(x + self.dropout(self.attention(x, keep_mask)))
        x = self.norm_ffn(x + self.dropout(self.ffn_out(F.relu(self.ffn_in(x)))))
        return x


class TransformerClassifier(nn.Module):
    def __init__(self, config: ModelConfig, vocab_size: int):
        super().__init__()
        config.validate()
        self.config = config
        self.vocab_size = vocab_size
        self.token_embedding = nn.Embedding(vocab_size, config.embed_dim)
        self.position_embedding = nn.Embedding(config.seq_len, config.embed_dim)
        self.blocks = nn.ModuleList(EncoderBlock(config) for _ in range(config.num_blocks))
        self.embed_dropout = nn.Dropout(config.dropout)
        self.head = nn.Linear(config.embed_dim, config.num_classes)
        self.reset_parameters(config.seed)

    def reset_parameters(self, seed: int) -> None:
        gen = torch.Generator().manual_seed(seed)
        for name, param in self.named_parameters():
            if param.dim() >= 2 or "embedding" in name:
                with torch.no_grad():
                    param.normal_(0.0, INIT_STD, generator=gen)
            elif "norm" in name and name.endswith("weight"):
                nn.init.ones_(param)
            else:
                nn.init.zeros_(param)
        # Residual branches start at zero so every block is the identity (up
        # to layer norm) at initialization. Without this the randomly-wired
        # blocks drown the token signal and small-corpus training stalls.
        for block in self.blocks:
            nn.init.zeros_(block.attn_out.weight)
            nn.init.zeros_(block.ffn_out.weight)

    def embed(self, ids: torch.Tensor) -> torch.Tensor:
        """(B, T) int ids -> (B, T, C) summed token + position embeddings."""
        if ids.max() >= self.vocab_size or ids.min() < 0:
            raise DataFormatError(
                f"token id out of range [0, {self.vocab_size}) in input batch"
            )
        seq_len = ids.shape[1]
        if seq_len > self.config.seq_len:
            raise DataFormatError(
                f"input length {seq_len} exceeds configured sequence length "
                f"{self.config.seq_len}"
            )
        tok = self.token_embedding(ids)
        if self.config.scale_embeddings:
            tok = tok * (self.config.embed_dim ** 0.5)
        pos = self.position_embedding.weight[:seq_len].unsqueeze(0)
        return self.embed_dropout(tok + pos)

    @staticmethod
    def mean_pool(x: torch.Tensor, keep_mask: torch.Tensor | None = None) -> torch.Tensor:
        """(B, T, C) -> (B, C) channel-wise mean over all T positions."""
        if keep_mask is None:
            return x.mean(dim=1)
        weights = keep_mask.to(x.dtype)
        return (x * weights.unsqueeze(-1)).sum(dim=1) / weights.sum(dim=1, keepdim=True)

    def classify_head(self, pooled: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self.head(pooled), dim=-1)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        """(B, T) ids -> (B, num_classes) probabilities summing to 1 per row."""
        keep_mask = None
        if self.config.padding_aware:
            keep_mask = ids.ne(0)  # reserved pad id; never assigned to corpus tokens
            keep_mask[:, 0] = True  # guard against fully padded rows
        x = self.embed(ids)
        for i, block in enumerate(self.blocks):
            x = block(x, keep_mask)
            bad = ~torch.isfinite(x).flatten(1).all(dim=1)
            if bad.any():
                raise NumericalDivergenceError(
                    f"non-finite activations after encoder block {i} for batch "
                    f"indices {bad.nonzero().flatten().tolist()}"
                )
        return self.classify_head(self.mean_pool(x, keep_mask))


def loss_fn(probs: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Mean categorical cross-entropy over predicted class probabilities."""
    picked = probs[torch.arange(probs.shape[0], device=probs.device), labels]
    return -torch.log(picked.clamp_min(PROB_FLOOR)).mean()


@torch.no_grad()
def predict(
    text: str,
    spec: PreTokenizerSpec,
    vocab: Vocabulary,
    model: TransformerClassifier,
) -> tuple[torch.Tensor, int]:
    """Classify one raw log text; returns (probabilities, argmax class index)."""
    model.eval()
    seq = encode(pretokenize(text, spec), vocab, model.config.seq_len)
    ids = torch.tensor([seq.ids], dtype=torch.long)
    probs = model(ids)[0]
    return probs, int(probs.argmax())
