"""
Aseo Parser Module

Reads and writes the ground program dialect (.lp files): normal rules,
constraints, #sum conditions and prioritized #minimize/#maximize statements.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ply import lex

from .errors import ParseError
from .program import (
    INT64_MAX,
    Atom,
    Literal,
    ObjectiveFunction,
    Program,
    Relation,
    Rule,
    SumCondition,
    WeightedLiteral,
    checked_add,
    normalize_objectives,
)

logger = logging.getLogger(__name__)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


class ProgramLexer:
    """ply lexer for the ground dialect"""

    tokens = ("NECK", "REL", "DIRECTIVE", "INT", "IDENT", "NOT", "PUNCT")

    t_ignore = " \t\r"

    def __init__(self):
        self.lexer = lex.lex(module=self, errorlog=lex.NullLogger())

    @staticmethod
    def column(data: str, position: int) -> int:
        return position - data.rfind("\n", 0, position)

    def t_newline(self, t):
        r"\n+"
        t.lexer.lineno += len(t.value)

    def t_COMMENT(self, t):
        r"%[^\n]*"

    def t_NECK(self, t):
        r":-"
        return t

    def t_REL(self, t):
        r"<=|>=|!=|<|>|="
        return t

    def t_DIRECTIVE(self, t):
        r"\#[A-Za-z]+"
        return t

    def t_INT(self, t):
        r"[+-]?\d+"
        return t

    def t_IDENT(self, t):
        r"[a-z][A-Za-z0-9_]*"
        data = t.lexer.lexdata
        end = t.lexer.lexpos
        # atom arguments in balanced parentheses stay part of the name
        if end < len(data) and data[end] == "(":
            depth = 0
            scan = end
            while scan < len(data) and data[scan] != "\n":
                if data[scan] == "(":
                    depth += 1
                elif data[scan] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                scan += 1
            if depth != 0 or scan >= len(data) or data[scan] != ")":
                raise ParseError(
                    t.lineno,
                    self.column(data, t.lexpos),
                    "unbalanced parentheses in atom",
                    data[t.lexpos:scan],
                )
            t.lexer.lexpos = scan + 1
            t.value = data[t.lexpos:scan + 1]
        if t.value == "not":
            t.type = "NOT"
        return t

    def t_PUNCT(self, t):
        r"[.,;{}:@]"
        return t

    def t_error(self, t):
        raise ParseError(t.lineno, self.column(t.lexer.lexdata, t.lexpos), "unexpected character", t.value[0])

    def tokenize(self, source: str) -> List[Token]:
        """
        Split program text into tokens

        Args:
            source: Program text

        Returns:
            Token list ending with an EOF token
        """
        lexer = self.lexer.clone()
        lexer.lineno = 1
        lexer.input(source)

        tokens = []
        for tok in iter(lexer.token, None):
            tokens.append(Token(tok.type, tok.value, tok.lineno, self.column(source, tok.lexpos)))
        tokens.append(Token("EOF", "", lexer.lineno, self.column(source, len(source))))
        return tokens


_LEXER = ProgramLexer()


def tokenize(source: str) -> List[Token]:
    """Split program text into tokens with the shared lexer"""
    return _LEXER.tokenize(source)


class ProgramParser:
    """Recursive-descent parser producing a Program"""

    def __init__(self, source: str):
        """
        Initialize the parser

        Args:
            source: Program text
        """
        self.tokens = tokenize(source)
        self.position = 0
        self.atoms: Dict[str, int] = {}
        self.rules: List[Rule] = []
        # level -> (statement number, maximize flag, terms)
        self.levels: Dict[int, Tuple[int, bool, List[WeightedLiteral]]] = {}
        # level -> sum of condition-free weights
        self.offsets: Dict[int, int] = {}
        self.statements = 0

    def parse(self) -> Program:
        while self.peek().kind != "EOF":
            self.statement()
            self.statements += 1

        atoms = tuple(Atom(index, name) for name, index in self.atoms.items())
        objectives = []
        for position, level in enumerate(sorted(self.levels), start=1):
            _, maximize, terms = self.levels[level]
            objectives.append(ObjectiveFunction(position, tuple(terms), self.offsets.get(level, 0), maximize))

        program = Program(atoms, tuple(self.rules), tuple(objectives))
        logger.debug(
            f"Parsed {len(program.rules)} rules, {program.size} atoms, {program.levels} levels"
        )
        return normalize_objectives(program)

    # token helpers

    def peek(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.tokens[self.position]
        self.position += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.peek()
        return ParseError(token.line, token.column, message, token.text)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        token = self.peek()
        if token.kind != kind or (text is not None and token.text != text):
            wanted = text or kind.lower()
            found = token.text or "end of input"
            raise self.error(f"expected '{wanted}', found '{found}'")
        return self.advance()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        token = self.peek()
        if token.kind == kind and (text is None or token.text == text):
            return self.advance()
        return None

    # grammar

    def statement(self):
        token = self.peek()
        if token.kind == "NECK":
            self.advance()
            pos, neg, sum_body = self.body()
            self.expect("PUNCT", ".")
            self.rules.append(Rule(None, pos, neg, sum_body))
        elif token.kind == "DIRECTIVE" and token.text in ("#minimize", "#maximize"):
            self.optimize_statement()
        elif token.kind == "IDENT":
            head = self.atom()
            pos, neg, sum_body = frozenset(), frozenset(), None
            if self.accept("NECK"):
                pos, neg, sum_body = self.body()
            self.expect("PUNCT", ".")
            self.rules.append(Rule(head, pos, neg, sum_body))
        else:
            raise self.error("expected a rule, constraint or #minimize statement")

    def body(self):
        pos, neg = set(), set()
        sum_body = None
        if self.peek().kind == "PUNCT" and self.peek().text == ".":
            return frozenset(), frozenset(), None

        while True:
            token = self.peek()
            if token.kind == "NOT":
                self.advance()
                neg.add(self.atom())
            elif token.kind == "IDENT":
                pos.add(self.atom())
            elif token.kind == "DIRECTIVE" and token.text == "#sum":
                if sum_body is not None:
                    raise self.error("at most one #sum condition per body")
                sum_body = self.sum_condition()
            else:
                raise self.error("expected a body element")
            if not self.accept("PUNCT", ","):
                break
        return frozenset(pos), frozenset(neg), sum_body

    def sum_condition(self) -> SumCondition:
        self.expect("DIRECTIVE", "#sum")
        self.expect("PUNCT", "{")
        terms = [self.weighted_literal()]
        while self.accept("PUNCT", ";"):
            terms.append(self.weighted_literal())
        self.expect("PUNCT", "}")
        relation = Relation(self.expect("REL").text)
        bound = self.integer()
        return SumCondition.normalized(terms, relation, bound)

    def weighted_literal(self) -> WeightedLiteral:
        weight = self.integer()
        self.expect("PUNCT", ":")
        return weight, self.literal()

    def optimize_statement(self):
        directive = self.advance()
        maximize = directive.text == "#maximize"
        self.expect("PUNCT", "{")
        while True:
            weight = self.integer()
            self.expect("PUNCT", "@")
            level_token = self.peek()
            level = self.integer()
            if level < 1:
                raise self.error("priority level must be positive", level_token)
            literal = self.literal() if self.accept("PUNCT", ":") else None

            owner = self.levels.get(level)
            if owner is not None and owner[0] != self.statements:
                raise self.error(f"priority level {level} already used by another statement", level_token)
            if owner is None:
                self.levels[level] = (self.statements, maximize, [])
            if literal is None:
                self.offsets[level] = checked_add(self.offsets.get(level, 0), weight)
            else:
                self.levels[level][2].append((weight, literal))

            if not self.accept("PUNCT", ";"):
                break
        self.expect("PUNCT", "}")
        self.expect("PUNCT", ".")

    def literal(self) -> Literal:
        if self.accept("NOT"):
            return Literal(self.atom(), False)
        return Literal(self.atom(), True)

    def atom(self) -> int:
        token = self.expect("IDENT")
        if token.text not in self.atoms:
            self.atoms[token.text] = len(self.atoms)
        return self.atoms[token.text]

    def integer(self) -> int:
        token = self.expect("INT")
        value = int(token.text)
        if abs(value) > INT64_MAX:
            raise self.error("integer does not fit in 64 bits", token)
        return value


def parse_program(source: str) -> Program:
    """
    Parse program text

    Args:
        source: Program text in the ground dialect

    Returns:
        Program with normalized objectives, atoms interned in first-seen order

    Raises:
        ParseError: On malformed input
    """
    return ProgramParser(source).parse()


def parse_file(path: str) -> Program:
    """Parse a .lp file"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Program file not found: {path}")
    logger.info(f"Parsing program: {path}")
    return parse_program(path.read_text(encoding="utf-8"))


def _render_literal(program: Program, literal: Literal) -> str:
    name = program.atoms[literal.atom].name
    return name if literal.positive else f"not {name}"


def _render_sum(program: Program, condition: SumCondition) -> str:
    terms = "; ".join(f"{weight}:{_render_literal(program, literal)}" for weight, literal in condition.terms)
    return f"#sum{{{terms}}} {condition.relation.value} {condition.bound}"


def render_rule(program: Program, rule: Rule) -> str:
    """Render one rule in the dialect"""
    elements = [program.atoms[a].name for a in sorted(rule.pos_body)]
    elements += [f"not {program.atoms[a].name}" for a in sorted(rule.neg_body)]
    if rule.sum_body is not None:
        elements.append(_render_sum(program, rule.sum_body))
    body = ", ".join(elements)

    if rule.is_constraint:
        return f":- {body}." if body else ":- ."
    head = program.atoms[rule.head].name
    return f"{head} :- {body}." if body else f"{head}."


def render_program(program: Program) -> str:
    """
    Render a program so that parse_program reproduces it up to atom relabeling

    Args:
        program: Any program

    Returns:
        Program text, empty for the empty program
    """
    lines = [render_rule(program, rule) for rule in program.rules]

    for objective in program.objectives:
        terms = [
            f"{weight}@{objective.level} : {_render_literal(program, literal)}"
            for weight, literal in objective.terms
        ]
        if objective.offset or not terms:
            terms.append(f"{objective.offset}@{objective.level}")
        directive = "#maximize" if objective.maximize else "#minimize"
        lines.append(f"{directive}{{{'; '.join(terms)}}}.")

    return "".join(f"{line}\n" for line in lines)
