"""Creation-operator product expressions with hidden-mode labels.

Grammar (whitespace insignificant)::

    expression := factor+
    factor     := '(' term (('+'|'-') term)* ')'
    term       := [coef '*'] modeId pol
    pol        := 'H' | 'V'
    coef       := decimal | 'i' | decimal 'i' | 'exp(i*' rational '*pi)'
                | named constant

Mode-definition lines, ``modeId = coef*modeId (+ coef*modeId)*``, declare a
derived mode as a unit-norm combination of primitive modes.  Constant
definitions, ``name = coef``, declare named coefficients.  Any identifier
never defined as derived is a primitive mode; primitive modes are mutually
orthonormal by convention.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Mapping

NORM_TOL = 1e-12


class ParseError(ValueError):
    """Syntax or semantic error, carrying the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Term:
    coefficient: complex
    polarization: str
    mode: str


@dataclass(frozen=True)
class CreationOperatorExpression:
    """Product of factors, each a sum of single-operator terms."""

    factors: tuple[tuple[Term, ...], ...]
    prefactor: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not self.factors:
            raise ValueError("expression must have at least one factor")
        if any(len(f) == 0 for f in self.factors):
            raise ValueError("every factor must have at least one term")

    @property
    def n(self) -> int:
        return len(self.factors)


@dataclass
class Definitions:
    """Named constants and derived-mode expansions over primitive modes."""

    constants: dict[str, complex] = field(default_factory=dict)
    modes: dict[str, dict[str, complex]] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_PUNCT = "()+-*/="


@dataclass(frozen=True)
class _Token:
    kind: str   # one of _PUNCT, 'number', 'ident', 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in _PUNCT:
            tokens.append(_Token(c, c, i))
            i += 1
        elif c.isdigit():
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == ".":
                j += 1
                while j < len(text) and text[j].isdigit():
                    j += 1
            if j < len(text) and text[j] in "eE":
                k = j + 1
                if k < len(text) and text[k] in "+-":
                    k += 1
                if k < len(text) and text[k].isdigit():
                    j = k + 1
                    while j < len(text) and text[j].isdigit():
                        j += 1
            tokens.append(_Token("number", text[i:j], i))
            i = j
        elif c.isalpha() or c == "_":
            j = i + 1
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, constants: Mapping[str, complex]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.constants = constants

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                             tok.pos)
        return self.next()

    # -- coefficients -------------------------------------------------------

    def starts_coefficient(self) -> bool:
        tok = self.peek()
        if tok.kind == "number":
            return True
        if tok.kind == "ident":
            if tok.text in ("i", "exp"):
                return True
            return self.peek(1).kind == "*"
        return False

    def parse_coefficient(self) -> complex:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            value = float(tok.text)
            nxt = self.peek()
            if nxt.kind == "ident" and nxt.text == "i":
                self.next()
                return value * 1j
            return complex(value)
        if tok.kind == "ident" and tok.text == "i":
            self.next()
            return 1j
        if tok.kind == "ident" and tok.text == "exp":
            return self._parse_exp()
        if tok.kind == "ident":
            self.next()
            if tok.text not in self.constants:
                raise ParseError(f"unknown constant {tok.text!r}", tok.pos)
            return self.constants[tok.text]
        raise ParseError(f"expected a coefficient, found {tok.text!r}", tok.pos)

    def _parse_exp(self) -> complex:
        self.expect("ident")          # 'exp'
        self.expect("(")
        unit = self.expect("ident")
        if unit.text != "i":
            raise ParseError("expected 'i' inside exp(...)", unit.pos)
        self.expect("*")
        sign = 1
        if self.peek().kind == "-":
            self.next()
            sign = -1
        num = self.expect("number")
        numerator = sign * float(num.text)
        denominator = 1.0
        if self.peek().kind == "/":
            self.next()
            denominator = float(self.expect("number").text)
        self.expect("*")
        pi_tok = self.expect("ident")
        if pi_tok.text != "pi":
            raise ParseError("expected 'pi' inside exp(...)", pi_tok.pos)
        self.expect(")")
        return cmath.exp(1j * cmath.pi * numerator / denominator)

    # -- terms and factors --------------------------------------------------

    def parse_mode_pol(self) -> tuple[str, str]:
        tok = self.expect("ident")
        if len(tok.text) < 2 or tok.text[-1] not in "HV":
            raise ParseError(
                f"expected modeId followed by polarization H or V, found {tok.text!r}",
                tok.pos)
        return tok.text[:-1], tok.text[-1]

    def parse_term(self, sign: int) -> Term:
        coef = complex(sign)
        if self.starts_coefficient():
            coef *= self.parse_coefficient()
            self.expect("*")
        mode, pol = self.parse_mode_pol()
        return Term(coef, pol, mode)

    def leading_sign(self) -> int:
        if self.peek().kind in "+-":
            return +1 if self.next().kind == "+" else -1
        return +1

    def parse_factor(self) -> tuple[Term, ...]:
        self.expect("(")
        terms = [self.parse_term(self.leading_sign())]
        while self.peek().kind in "+-":
            sign = +1 if self.next().kind == "+" else -1
            terms.append(self.parse_term(sign))
        self.expect(")")
        return tuple(terms)

    def parse_expression(self) -> tuple[tuple[Term, ...], ...]:
        factors = [self.parse_factor()]
        while self.peek().kind == "(":
            factors.append(self.parse_factor())
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return tuple(factors)

    # -- definition right-hand sides ----------------------------------------

    def parse_mode_combination(self) -> dict[str, complex]:
        combo: dict[str, complex] = {}
        sign = self.leading_sign()
        while True:
            coef = complex(sign)
            if self.starts_coefficient():
                coef *= self.parse_coefficient()
                self.expect("*")
            ident = self.expect("ident")
            combo[ident.text] = combo.get(ident.text, 0) + coef
            tok = self.peek()
            if tok.kind == "end":
                return combo
            if tok.kind not in "+-":
                raise ParseError(f"expected '+', '-' or end of line, found {tok.text!r}",
                                 tok.pos)
            sign = +1 if self.next().kind == "+" else -1


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def _substitute_modes(factors, definitions: Definitions):
    out = []
    for factor in factors:
        new_terms: list[Term] = []
        for term in factor:
            expansion = definitions.modes.get(term.mode)
            if expansion is None:
                new_terms.append(term)
            else:
                new_terms.extend(
                    Term(term.coefficient * gamma, term.polarization, prim)
                    for prim, gamma in expansion.items())
        out.append(tuple(new_terms))
    return tuple(out)


def parse_operator_expression(
    text: str,
    definitions: Definitions | None = None,
) -> CreationOperatorExpression:
    """Parse an expression and substitute derived modes by their expansions."""
    definitions = definitions or Definitions()
    parser = _Parser(text, definitions.constants)
    factors = parser.parse_expression()
    return CreationOperatorExpression(_substitute_modes(factors, definitions))


def parse_definition_line(line: str, definitions: Definitions) -> None:
    """Parse one ``name = ...`` line, updating ``definitions`` in place.

    The right-hand side is first tried as a lone coefficient (constant
    definition); anything else is a derived-mode combination whose
    coefficient vector must have unit norm.
    """
    eq = line.index("=")
    name = line[:eq].strip()
    if not name.isidentifier():
        raise ParseError(f"invalid definition name {name!r}", 0)
    rhs = line[eq + 1:]

    parser = _Parser(rhs, definitions.constants)
    try:
        value = parser.parse_coefficient()
        if parser.peek().kind == "end":
            definitions.constants[name] = value
            return
    except ParseError:
        pass

    parser = _Parser(rhs, definitions.constants)
    combo = parser.parse_mode_combination()
    resolved: dict[str, complex] = {}
    for ident, coef in combo.items():
        if ident == name:
            raise ParseError(f"mode {name!r} defined in terms of itself", eq + 1)
        expansion = definitions.modes.get(ident, {ident: 1.0 + 0.0j})
        for prim, gamma in expansion.items():
            resolved[prim] = resolved.get(prim, 0) + coef * gamma
    norm_sq = sum(abs(v) ** 2 for v in resolved.values())
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise ParseError(
            f"derived mode {name!r} has norm {norm_sq ** 0.5:.12f}, expected 1",
            eq + 1)
    definitions.modes[name] = resolved


def parse_expression_file(text: str) -> CreationOperatorExpression:
    """Parse a full expression file: definition lines, then the expression.

    Lines containing '=' are definitions (constants or derived modes);
    '#' starts a comment; remaining lines are joined into the expression.
    """
    definitions = Definitions()
    expression_parts: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            parse_definition_line(line, definitions)
        else:
            expression_parts.append(line)
    body = " ".join(expression_parts)
    if not body:
        raise ParseError("no expression found in input", 0)
    return parse_operator_expression(body, definitions)
