"""Shunting-yard SPDX reader producing a fully parenthesized rendering.

Written independently of the production recursive-descent parser: operator
precedence lives in a table, and every binary node is wrapped in parentheses
so two readings agree only if they group identically.
"""

from __future__ import annotations

import re

PRECEDENCE = {"WITH": 3, "AND": 2, "OR": 1}
_TOKENS = re.compile(r"\s*([A-Za-z0-9.\-]+\+?|\(|\))")


def tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if not m:
            raise ValueError(f"bad token at {pos}")
        word = m.group(1)
        out.append(word.upper() if word.upper() in PRECEDENCE else word)
        pos = m.end()
    return out


def to_rpn(toks: list[str]) -> list[str]:
    output, stack = [], []
    for t in toks:
        if t in PRECEDENCE:
            while stack and stack[-1] in PRECEDENCE and PRECEDENCE[stack[-1]] >= PRECEDENCE[t]:
                output.append(stack.pop())
            stack.append(t)
        elif t == "(":
            stack.append(t)
        elif t == ")":
            while stack and stack[-1] != "(":
                output.append(stack.pop())
            if not stack:
                raise ValueError("unbalanced")
            stack.pop()
        else:
            output.append(t)
    while stack:
        t = stack.pop()
        if t == "(":
            raise ValueError("unbalanced")
        output.append(t)
    return output


def parenthesize(text: str) -> str:
    stack: list[str] = []
    for t in to_rpn(tokens(text)):
        if t in PRECEDENCE:
            right, left = stack.pop(), stack.pop()
            stack.append(f"({left} {t} {right})")
        else:
            stack.append(t)
    if len(stack) != 1:
        raise ValueError("malformed")
    return stack[0]
