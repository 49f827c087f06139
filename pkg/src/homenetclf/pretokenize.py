"""Pre-tokenizers that split raw tool output into token strings.

Two rules are supported:

* greedy digit splitting: the text is cut around runs of decimal digits and
  the runs themselves are chopped into chunks of at most ``k`` digits.  A run
  may carry a single leading minus sign when that minus is not itself preceded
  by a digit (so ``signal=-54`` keeps the sign with the number while ``1-2``
  splits into ``1``, ``-``, ``2``).  Newline characters are split points and
  are dropped from the output; everything else is preserved verbatim, so the
  concatenation of the tokens reproduces the input minus its newlines.

* whitespace splitting: maximal runs of non-whitespace characters.

Both functions are pure and total; they never raise on any input string.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ConfigurationError


class PreTokenizerKind(Enum):
    GREEDY_K_DIGITS = "greedy_k_digits"
    WHITESPACE = "whitespace"


@dataclass(frozen=True)
class PreTokenizerSpec:
    kind: PreTokenizerKind
    k: int = 3

    def __post_init__(self) -> None:
        if self.kind is PreTokenizerKind.GREEDY_K_DIGITS and self.k < 1:
            raise ConfigurationError(f"digit chunk size must be >= 1, got {self.k}")

    def describe(self) -> str:
        if self.kind is PreTokenizerKind.GREEDY_K_DIGITS:
            return f"greedy-{self.k}-digits"
        return "whitespace"


def _is_digit(ch: str) -> bool:
    # ASCII only: tool output does not use other Unicode digit ranges, and
    # str.isdigit() would accept them.
    return "0" <= ch <= "9"


def greedy_k_digits(text: str, k: int) -> list[str]:
    """Split ``text`` around digit runs, chunking each run after ``k`` digits.

    Joining the result equals ``text`` with every newline removed.
    """
    if k < 1:
        raise ConfigurationError(f"digit chunk size must be >= 1, got {k}")

    tokens: list[str] = []
    buf: list[str] = []  # pending non-number text

    def flush() -> None:
        if buf:
            tokens.append("".join(buf))
            buf.clear()

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            flush()
            i += 1
            continue
        starts_number = _is_digit(ch) or (
            ch == "-"
            and i + 1 < n
            and _is_digit(text[i + 1])
            and not (i > 0 and _is_digit(text[i - 1]))
        )
        if not starts_number:
            buf.append(ch)
            i += 1
            continue
        flush()
        chunk: list[str] = []
        digits = 0
        if ch == "-":  # sign rides along with the first chunk, free of charge
            chunk.append(ch)
            i += 1
        while i < n and _is_digit(text[i]):
            chunk.append(text[i])
            digits += 1
            i += 1
            if digits == k:
                tokens.append("".join(chunk))
                chunk = []
                digits = 0
        if chunk:
            tokens.append("".join(chunk))
    flush()
    return tokens


def whitespace_pretokenize(text: str) -> list[str]:
    """Maximal runs of non-whitespace characters, in order."""
    return text.split()


def pretokenize(text: str, spec: PreTokenizerSpec) -> list[str]:
    """Dispatch to the rule selected by ``spec``."""
    if spec.kind is PreTokenizerKind.GREEDY_K_DIGITS:
        return greedy_k_digits(text, spec.k)
    return whitespace_pretokenize(text)
