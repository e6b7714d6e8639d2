"""Tokenizer for the synthesizable Verilog-2005 subset.

Produces a token stream with byte offsets and line/column positions, plus a
separate comment stream (line and block comments) so the parser can attach
comments to the following declaration or statement as trivia. Preprocessor
directives (`define, `include, ...) are rejected: the subset is preprocessed
source only.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from .errors import ParseError


class T(Enum):
    NUMBER = auto()
    IDENT = auto()
    KEYWORD = auto()
    OP = auto()
    EOF = auto()


@dataclass(frozen=True)
class Token:
    kind: T
    text: str
    start: int
    end: int
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.kind.name}, {self.text!r}, L{self.line}:{self.col})"


@dataclass(frozen=True)
class Comment:
    text: str           # full text including // or /* */
    start: int
    end: int
    line: int
    col: int
    own_line: bool      # nothing but whitespace before it on its line


KEYWORDS = frozenset({
    "module", "endmodule", "input", "output", "inout", "wire", "reg",
    "parameter", "localparam", "assign", "always", "begin", "end",
    "if", "else", "case", "endcase", "default", "posedge", "negedge", "or",
})

# Constructs we recognize but deliberately reject, so the diagnostic names them.
REJECTED_KEYWORDS = frozenset({
    "generate", "endgenerate", "genvar", "for", "while", "repeat", "forever",
    "function", "endfunction", "task", "endtask", "initial", "integer",
    "real", "time", "casex", "casez", "signed", "interface", "endinterface",
    "specify", "endspecify", "fork", "join", "wait", "deassign", "force",
    "release", "defparam", "event", "tri", "tri0", "tri1", "supply0",
    "supply1", "wand", "wor", "automatic",
})

# Multi-character operators, longest first.
_OPERATORS = [
    "<<<", ">>>", "===", "!==",
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^", "^~",
    "**",
    "(", ")", "[", "]", "{", "}", ";", ",", ".", ":", "@", "#", "?",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=",
]

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789$")
_DIGITS = frozenset("0123456789")


def lex(text: str, origin: str = "<input>") -> tuple[list[Token], list[Comment]]:
    """Tokenize `text`. Returns (tokens, comments); tokens end with EOF."""
    tokens: list[Token] = []
    comments: list[Comment] = []
    i = 0
    n = len(text)
    line = 1
    line_start = 0
    line_has_code = False

    def pos_err(msg, at):
        return ParseError(msg, line, at - line_start + 1, origin)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            line_start = i
            line_has_code = False
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            if j == -1:
                j = n
            comments.append(Comment(text[i:j], i, j, line, i - line_start + 1,
                                    not line_has_code))
            i = j
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            if j == -1:
                raise pos_err("unterminated block comment", i)
            comments.append(Comment(text[i:j + 2], i, j + 2, line,
                                    i - line_start + 1, not line_has_code))
            line += text.count("\n", i, j + 2)
            if "\n" in text[i:j + 2]:
                line_start = text.rfind("\n", i, j + 2) + 1
                line_has_code = False
            i = j + 2
            continue
        if c == "`":
            raise pos_err("preprocessor directives are not supported", i)
        if c == '"':
            raise pos_err("string literals are not supported", i)
        line_has_code = True
        col = i - line_start + 1

        if c in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            word = text[i:j]
            if word in REJECTED_KEYWORDS:
                raise pos_err(f"unsupported construct '{word}'", i)
            kind = T.KEYWORD if word in KEYWORDS else T.IDENT
            tokens.append(Token(kind, word, i, j, line, col))
            i = j
            continue

        if c in _DIGITS or (c == "'" and i + 1 < n):
            tok, i2 = _lex_number(text, i, line, col, pos_err)
            tokens.append(tok)
            i = i2
            continue

        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token(T.OP, op, i, i + len(op), line, col))
                i += len(op)
                break
        else:
            raise pos_err(f"unexpected character {c!r}", i)

    tokens.append(Token(T.EOF, "", n, n, line, n - line_start + 1))
    return tokens, comments


def _lex_number(text: str, i: int, line: int, col: int, pos_err) -> tuple[Token, int]:
    """Lex a numeric literal: plain decimal, or sized/based `8'hA5` form.

    A plain decimal immediately followed by `'` (as in `8'hA5`) is folded
    into one NUMBER token so the parser sees the full literal spelling.
    """
    n = len(text)
    j = i
    while j < n and (text[j] in _DIGITS or text[j] == "_"):
        j += 1
    if j < n and text[j] == "'":
        k = j + 1
        if k < n and text[k] in "sS":
            k += 1
        if k >= n or text[k] not in "bBoOdDhH":
            if k < n and text[k] in "xXzZ":
                raise pos_err("x/z literals are not supported", i)
            raise pos_err("malformed based literal", i)
        base = text[k].lower()
        k += 1
        digits = "0123456789_"
        if base == "b":
            digits = "01_"
        elif base == "o":
            digits = "01234567_"
        elif base == "h":
            digits = "0123456789abcdefABCDEF_"
        start_digits = k
        while k < n and text[k] in digits:
            k += 1
        if k < n and text[k] in "xXzZ?":
            raise pos_err("x/z digits in literals are not supported", i)
        if k == start_digits:
            raise pos_err("based literal has no digits", i)
        return Token(T.NUMBER, text[i:k], i, k, line, col), k
    if j == i:
        raise pos_err(f"unexpected character {text[i]!r}", i)
    return Token(T.NUMBER, text[i:j], i, j, line, col), j
