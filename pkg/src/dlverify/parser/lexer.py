"""Tokenizer for the ASCII surface syntax."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Tuple


class DLSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int       # offset into source
    line: int
    col: int

    @property
    def end(self) -> int:
        return self.pos + len(self.text)


KEYWORDS = {"true", "false", "forall", "exists", "if", "then", "else", "while",
            "state", "const", "var", "mode", "edge", "flow", "init", "guard",
            "reset", "initial", "domain"}

_TOKEN_RE = re.compile(r"""
    (?P<WS>\s+)
  | (?P<COMMENT>\#[^\n]*)
  | (?P<NUMBER>\d+(?:\.\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z_0-9$]*)
  | (?P<OP> \:\:\= | \:\= | \<\-\> | \-\> | \<\= | \>\= | \!\= | \+\+
      | [\[\]\{\}\(\)\<\>\=\+\-\*/&|!?;,:.'^])
""", re.VERBOSE)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    line = 1
    linestart = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DLSyntaxError(f"unexpected character {text[pos]!r}",
                                line, pos - linestart + 1)
        kind = m.lastgroup
        tok_text = m.group()
        if kind in ("WS", "COMMENT"):
            nl = tok_text.count("\n")
            if nl:
                line += nl
                linestart = pos + tok_text.rindex("\n") + 1
        else:
            col = pos - linestart + 1
            if kind == "IDENT" and tok_text in KEYWORDS:
                kind = tok_text.upper()
            elif kind == "OP":
                kind = tok_text
            tokens.append(Token(kind, tok_text, pos, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", n, line, n - linestart + 1))
    return tokens


def line_col(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    last = text.rfind("\n", 0, pos)
    return line, pos - last
