"""Token vocabulary and fixed-length integer encoding.

Ids 0 and 1 are reserved for the padding and unknown tokens.  Corpus tokens
get ids in descending frequency order with lexicographic tie-breaking, which
makes vocabulary construction fully deterministic for a given corpus.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError, DataFormatError

PAD_TOKEN = "<PAD>"
UNK_TOKEN = "<UNK>"
PAD_ID = 0
UNK_ID = 1


@dataclass
class Vocabulary:
    id_to_token: list[str]
    token_to_id: dict[str, int] = field(init=False, repr=False)
    pad_id: int = PAD_ID
    unk_id: int = UNK_ID

    def __post_init__(self) -> None:
        self.token_to_id = {tok: i for i, tok in enumerate(self.id_to_token)}

    def __len__(self) -> int:
        return len(self.id_to_token)

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def lookup(self, token: str) -> int:
        return self.token_to_id.get(token, self.unk_id)

    def token(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.id_to_token):
            raise DataFormatError(
                f"token id {token_id} out of range for vocabulary of size {len(self)}"
            )
        return self.id_to_token[token_id]

    def content_hash(self) -> str:
        """SHA-256 over the serialized form; used to tie checkpoints to vocabs."""
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()

    def dumps(self) -> str:
        return "".join(_escape(tok) + "\n" for tok in self.id_to_token)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines = lines[:-1]
        if len(lines) < 2 or lines[0] != PAD_TOKEN or lines[1] != UNK_TOKEN:
            raise DataFormatError(f"{path}: not a vocabulary file (missing reserved tokens)")
        return cls(id_to_token=[_unescape(line) for line in lines])


@dataclass
class TokenSequence:
    ids: list[int]
    true_length: int

    def __post_init__(self) -> None:
        if not 0 <= self.true_length <= len(self.ids):
            raise DataFormatError(
                f"true_length {self.true_length} out of range for {len(self.ids)} ids"
            )


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\"}


def _escape(token: str) -> str:
    return (
        token.replace("\\", "\\\\")
        .replace("\n", "\\n")
        .replace("\t", "\\t")
        .replace("\r", "\\r")
    )


def _unescape(line: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == "\\" and i + 1 < len(line) and line[i + 1] in _ESCAPES:
            out.append(_ESCAPES[line[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def build_vocabulary(corpus: list[list[str]], min_frequency: int = 1) -> Vocabulary:
    """Build a vocabulary from pre-tokenized documents.

    Tokens occurring fewer than ``min_frequency`` times are dropped.  Ids are
    assigned by descending frequency, ties broken lexicographically, after the
    two reserved ids.
    """
    if not corpus:
        raise ConfigurationError("cannot build a vocabulary from an empty corpus")
    if min_frequency < 1:
        raise ConfigurationError(f"min_frequency must be >= 1, got {min_frequency}")
    counts: Counter[str] = Counter()
    for tokens in corpus:
        counts.update(tokens)
    kept = sorted(
        (tok for tok, cnt in counts.items() if cnt >= min_frequency),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocabulary(id_to_token=[PAD_TOKEN, UNK_TOKEN] + kept)


def encode(tokens: list[str], vocab: Vocabulary, seq_len: int) -> TokenSequence:
    """Map tokens to ids, truncating to or right-padding up to ``seq_len``."""
    if seq_len < 1:
        raise ConfigurationError(f"sequence length must be >= 1, got {seq_len}")
    ids = [vocab.lookup(tok) for tok in tokens[:seq_len]]
    true_length = len(ids)
    ids.extend([vocab.pad_id] * (seq_len - true_length))
    return TokenSequence(ids=ids, true_length=true_length)


def decode(seq: TokenSequence, vocab: Vocabulary) -> list[str]:
    """Inverse of :func:`encode` over the unpadded prefix."""
    return [vocab.token(i) for i in seq.ids[: seq.true_length]]
