"""Recursive-descent parser for the formula grammar.

Grammar (whitespace-insensitive)::

    theta := phi ("and" phi)* | chain
    chain := "F[" NUM "," NUM "](" psi "and" chain ")"
           | "F[" NUM "," NUM "]" psi
    phi   := ("G" | "F") "[" NUM "," NUM "]" psi
    psi   := term ("and" term)*
    term  := pred | "not" pred | "(" psi ")"
    pred  := "ball(" IDXLIST ";" NUMLIST ";" NUM ")"
           | "join(" IDXLIST ";" IDXLIST ";" NUM ")"
           | "band(" IDX ";" NUM ";" NUM ")"
           | "aff(" NUMLIST ";" NUM ")"

A band term desugars into two opposing affine leaves.  A chain with a
single step is indistinguishable from a plain Eventually atom and is
parsed as one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FormulaError, ParseError
from .formulas import NonTemporalFormula, SequentialFormula, TemporalFormula
from .predicates import PredicateSpec, affine, ball, join

__all__ = ["parse_formula", "parse_psi", "band_leaves"]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<word>[A-Za-z_]+)"
    r"|(?P<punct>[\[\](),;]))"
)


def band_leaves(idx: int, center: float, halfwidth: float) -> tuple[PredicateSpec, PredicateSpec]:
    """Two affine leaves encoding |x_idx - center| < halfwidth."""
    if halfwidth <= 0.0:
        raise ValueError("band halfwidth must be positive")
    upper = affine((idx,), (1.0,), center + halfwidth)
    lower = affine((idx,), (-1.0,), halfwidth - center)
    return upper, lower


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        for kind in ("num", "word", "punct"):
            value = match.group(kind)
            if value is not None:
                tokens.append(_Token(kind, value, match.start(kind)))
                break
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str, allow_nonconcave: bool) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.allow_nonconcave = allow_nonconcave

    # -- token helpers ------------------------------------------------

    def _peek(self, ahead: int = 0) -> _Token | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def _expect(self, text: str) -> _Token:
        tok = self._next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.pos)
        return tok

    def _number(self) -> float:
        tok = self._next()
        if tok.kind != "num":
            raise ParseError(f"expected a number, found {tok.text!r}", tok.pos)
        return float(tok.text)

    def _index(self) -> int:
        tok = self._next()
        if tok.kind != "num" or not re.fullmatch(r"\d+", tok.text):
            raise ParseError(f"expected a state index, found {tok.text!r}", tok.pos)
        return int(tok.text)

    def _at_word(self, *words: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == "word" and tok.text in words

    # -- grammar ------------------------------------------------------

    def parse_theta(self) -> SequentialFormula:
        first = self._peek()
        if first is None:
            raise ParseError("empty formula", 0)
        if first.text == "F":
            chain = self._parse_chain()
            if len(chain) > 1:
                self._end()
                return self._make_sequential("s2", chain, first.pos)
            atoms = chain
        else:
            atoms = [self._parse_phi()]
        while self._at_word("and"):
            self._next()
            atoms.append(self._parse_phi())
        self._end()
        return self._make_sequential("s1", atoms, first.pos)

    def _make_sequential(self, kind, atoms, pos) -> SequentialFormula:
        try:
            return SequentialFormula(kind=kind, atoms=tuple(atoms))
        except FormulaError as exc:
            raise ParseError(str(exc), pos) from exc

    def _end(self) -> None:
        tok = self._peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok.text!r}", tok.pos)

    def _window(self) -> tuple[float, float]:
        self._expect("[")
        a = self._number()
        self._expect(",")
        b = self._number()
        self._expect("]")
        return a, b

    def _parse_phi(self) -> TemporalFormula:
        tok = self._next()
        if tok.text not in ("G", "F"):
            raise ParseError(f"expected G or F, found {tok.text!r}", tok.pos)
        a, b = self._window()
        nxt = self._peek()
        if nxt is not None and nxt.text == "(":
            # Parenthesized argument: stop at the matching paren so a
            # following "and" stays with the outer conjunction.
            self._next()
            leaves = list(self._parse_term())
            while self._at_word("and"):
                self._next()
                leaves.extend(self._parse_term())
            self._expect(")")
            psi = self._make_psi(leaves, nxt.pos)
        else:
            psi = self._parse_psi()
        return self._make_atom(tok, a, b, psi)

    def _make_atom(self, tok: _Token, a: float, b: float, psi: NonTemporalFormula) -> TemporalFormula:
        try:
            return TemporalFormula(op=tok.text, a=a, b=b, psi=psi)
        except FormulaError as exc:
            raise ParseError(str(exc), tok.pos) from exc

    def _make_atom_f(self, a: float, b: float, psi: NonTemporalFormula, pos: int) -> TemporalFormula:
        try:
            return TemporalFormula(op="F", a=a, b=b, psi=psi)
        except FormulaError as exc:
            raise ParseError(str(exc), pos) from exc

    def _parse_chain(self) -> list[TemporalFormula]:
        """Parse one chain step, recursing when the conjunction nests
        another Eventually window after an "and"."""
        self._expect("F")
        a, b = self._window()
        tok = self._peek()
        if tok is not None and tok.text == "(":
            self._next()
            leaves: list[PredicateSpec] = []
            rest: list[TemporalFormula] = []
            leaves.extend(self._parse_term())
            while self._at_word("and"):
                self._next()
                if self._at_word("F") and self._peek(1) is not None and self._peek(1).text == "[":
                    rest = self._parse_chain()
                    break
                leaves.extend(self._parse_term())
            self._expect(")")
            psi = self._make_psi(leaves, tok.pos)
            return [self._make_atom_f(a, b, psi, tok.pos)] + rest
        psi = self._parse_psi()
        return [self._make_atom_f(a, b, psi, 0)]

    def _parse_psi(self) -> NonTemporalFormula:
        start = self._peek()
        pos = start.pos if start is not None else len(self.text)
        leaves = list(self._parse_term())
        while self._at_word("and"):
            self._next()
            leaves.extend(self._parse_term())
        return self._make_psi(leaves, pos)

    def _make_psi(self, leaves: list[PredicateSpec], pos: int) -> NonTemporalFormula:
        try:
            psi = NonTemporalFormula(leaves=tuple(leaves))
            psi.validate(allow_nonconcave=self.allow_nonconcave)
        except Exception as exc:
            raise ParseError(str(exc), pos) from exc
        return psi

    def _parse_term(self) -> list[PredicateSpec]:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        if tok.text == "(":
            self._next()
            leaves = list(self._parse_term())
            while self._at_word("and"):
                self._next()
                leaves.extend(self._parse_term())
            self._expect(")")
            return leaves
        if tok.text == "not":
            self._next()
            pred = self._parse_pred()
            if len(pred) != 1:
                raise ParseError("cannot negate a band; negate its sides separately", tok.pos)
            return [pred[0].negate()]
        return list(self._parse_pred())

    def _parse_pred(self) -> tuple[PredicateSpec, ...]:
        tok = self._next()
        if tok.kind != "word" or tok.text not in ("ball", "join", "band", "aff"):
            raise ParseError(f"expected a predicate, found {tok.text!r}", tok.pos)
        self._expect("(")
        if tok.text == "ball":
            sel = self._index_list()
            self._expect(";")
            center = self._number_list()
            self._expect(";")
            radius = self._number()
            self._expect(")")
            if len(sel) != len(center):
                raise ParseError("ball selector and center lengths differ", tok.pos)
            if radius <= 0.0:
                raise ParseError("ball radius must be positive", tok.pos)
            return (ball(tuple(sel), tuple(center), radius),)
        if tok.text == "join":
            sel_a = self._index_list()
            self._expect(";")
            sel_b = self._index_list()
            self._expect(";")
            radius = self._number()
            self._expect(")")
            if len(sel_a) != len(sel_b):
                raise ParseError("join selector lengths differ", tok.pos)
            if radius <= 0.0:
                raise ParseError("join radius must be positive", tok.pos)
            return (join(tuple(sel_a), tuple(sel_b), radius),)
        if tok.text == "band":
            idx = self._index()
            self._expect(";")
            center = self._number()
            self._expect(";")
            halfwidth = self._number()
            self._expect(")")
            if halfwidth <= 0.0:
                raise ParseError("band halfwidth must be positive", tok.pos)
            return band_leaves(idx, center, halfwidth)
        coeffs = self._number_list()
        self._expect(";")
        offset = self._number()
        self._expect(")")
        sel = tuple(i for i, c in enumerate(coeffs) if c != 0.0)
        if not sel:
            raise ParseError("affine predicate needs a nonzero coefficient", tok.pos)
        return (affine(sel, tuple(coeffs[i] for i in sel), offset),)

    def _index_list(self) -> list[int]:
        indices = [self._index()]
        while self._peek() is not None and self._peek().text == ",":
            self._next()
            indices.append(self._index())
        return indices

    def _number_list(self) -> list[float]:
        numbers = [self._number()]
        while self._peek() is not None and self._peek().text == ",":
            self._next()
            numbers.append(self._number())
        return numbers


def parse_formula(text: str, allow_nonconcave: bool = False) -> SequentialFormula:
    """Parse a full sequential formula from text."""
    return _Parser(text, allow_nonconcave).parse_theta()


def parse_psi(text: str, allow_nonconcave: bool = False) -> NonTemporalFormula:
    """Parse a bare conjunction (no temporal operators)."""
    parser = _Parser(text, allow_nonconcave)
    psi = parser._parse_psi()
    parser._end()
    return psi
