"""
CHC-COMP Toolkit - SMT-LIB Frontend Module
Lexer, parser and canonical printer for the CHC fragment of SMT-LIB 2.6.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple, Union

from chc_model_module import (
    BOOL, FALSE, INT, REAL, TRUE, THEORY_OPS,
    App, Benchmark, Clause, Num, PredApp, PredicateDecl, Sort, SortError, Term, Var,
    array_sort, conjunction, conjuncts, exact_decimal, free_vars, iter_subterms, pred_apps, sort_of, substitute,
)

logger = logging.getLogger(__name__)

IGNORED_COMMANDS = {"set-info", "set-option", "get-model", "exit"}
UNSUPPORTED_COMMANDS = {"define-fun", "define-fun-rec", "declare-const", "declare-sort",
                        "define-sort", "push", "pop", "declare-datatypes", "declare-datatype"}


# === TOKENS AND DIAGNOSTICS ===

class TokenKind(Enum):
    LPAREN = "("
    RPAREN = ")"
    SYMBOL = "symbol"
    KEYWORD = "keyword"
    NUMERAL = "numeral"
    DECIMAL = "decimal"
    STRING = "string"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.severity}: {self.message}"
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col


_SIMPLE_SYMBOL = re.compile(r"[a-zA-Z~!@$%^&*_+=<>.?/\-][0-9a-zA-Z~!@$%^&*_+=<>.?/\-]*")
_SYMBOL_CHARS = set("~!@$%^&*_+=<>.?/-")
_RESERVED = {"par", "NUMERAL", "DECIMAL", "STRING", "_", "!", "as", "let", "exists", "forall",
             "match", "true", "false", "and", "or", "not", "=>", "ite"}


def _symbol_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch in _SYMBOL_CHARS)


def tokenize(source: str) -> List[Token]:
    """Split SMT-LIB text into tokens; comments and whitespace produce none."""
    tokens: List[Token] = []
    i, line, col, n = 0, 1, 1, len(source)

    def advance(count: int):
        nonlocal i, line, col
        for _ in range(count):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n\f\v":
            advance(1)
        elif ch == ";":
            while i < n and source[i] != "\n":
                advance(1)
        elif ch == "(":
            tokens.append(Token(TokenKind.LPAREN, ch, line, col))
            advance(1)
        elif ch == ")":
            tokens.append(Token(TokenKind.RPAREN, ch, line, col))
            advance(1)
        elif ch == "|":
            start_line, start_col = line, col
            j = source.find("|", i + 1)
            if j < 0:
                raise LexError("unterminated quoted symbol", start_line, start_col)
            text = source[i + 1:j]
            if "\\" in text:
                raise LexError("backslash in quoted symbol", start_line, start_col)
            advance(j + 1 - i)
            tokens.append(Token(TokenKind.SYMBOL, text, start_line, start_col))
        elif ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while True:
                if j >= n:
                    raise LexError("unterminated string literal", start_line, start_col)
                if source[j] == '"':
                    if j + 1 < n and source[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            text = source[i + 1:j].replace('""', '"')
            advance(j + 1 - i)
            tokens.append(Token(TokenKind.STRING, text, start_line, start_col))
        elif ch.isascii() and ch.isdigit():
            start_line, start_col = line, col
            j = i
            while j < n and source[j].isascii() and source[j].isdigit():
                j += 1
            kind = TokenKind.NUMERAL
            if j + 1 < n and source[j] == "." and source[j + 1].isascii() and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isascii() and source[j].isdigit():
                    j += 1
                kind = TokenKind.DECIMAL
            if j < n and _symbol_char(source[j]):
                raise LexError(f"malformed numeral {source[i:j + 1]!r}", start_line, start_col)
            text = source[i:j]
            advance(j - i)
            tokens.append(Token(kind, text, start_line, start_col))
        elif ch == ":" or _symbol_char(ch):
            start_line, start_col = line, col
            j = i + 1
            while j < n and _symbol_char(source[j]):
                j += 1
            text = source[i:j]
            if ch == ":" and len(text) == 1:
                raise LexError("empty keyword", start_line, start_col)
            advance(j - i)
            kind = TokenKind.KEYWORD if ch == ":" else TokenKind.SYMBOL
            tokens.append(Token(kind, text, start_line, start_col))
        else:
            raise LexError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token(TokenKind.EOF, "", line, col))
    return tokens


# === S-EXPRESSIONS ===

@dataclass
class SExpr:
    """A parenthesised list, remembering where it opened."""
    items: List[Union["SExpr", Token]]
    line: int
    col: int


Node = Union[SExpr, Token]


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col

    @classmethod
    def at(cls, node: Node, message: str) -> "ParseError":
        return cls(message, node.line, node.col)


def read_sexprs(tokens: List[Token]) -> List[Node]:
    """Group tokens into top-level s-expressions (iteratively, so nesting depth is unbounded)."""
    stack: List[SExpr] = []
    top: List[Node] = []
    for tok in tokens:
        if tok.kind is TokenKind.EOF:
            break
        if tok.kind is TokenKind.LPAREN:
            stack.append(SExpr([], tok.line, tok.col))
        elif tok.kind is TokenKind.RPAREN:
            if not stack:
                raise ParseError("unbalanced parentheses: unexpected ')'", tok.line, tok.col)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            (stack[-1].items if stack else top).append(tok)
    if stack:
        raise ParseError("unbalanced parentheses: missing ')'", stack[-1].line, stack[-1].col)
    return top


def _head(node: Node) -> Optional[str]:
    if isinstance(node, SExpr) and node.items and isinstance(node.items[0], Token) \
            and node.items[0].kind is TokenKind.SYMBOL:
        return node.items[0].text
    return None


def _symbol(node: Node, what: str) -> str:
    if isinstance(node, Token) and node.kind is TokenKind.SYMBOL:
        return node.text
    raise ParseError.at(node, f"expected {what}")


# === CONVERSION TO THE MODEL ===

class _Converter:
    """Turns s-expressions into a Benchmark, collecting diagnostics."""

    def __init__(self, origin: str):
        self.origin = origin
        self.logic = "HORN"
        self.decls: Dict[str, PredicateDecl] = {}
        self.decl_order: List[PredicateDecl] = []
        self.clauses: List[Clause] = []
        self.positions: List[Tuple[int, int]] = []
        self.diagnostics: List[ParseDiagnostic] = []
        self.seen_assert = False
        self.seen_check_sat = False

    def error(self, node: Node, message: str):
        self.diagnostics.append(ParseDiagnostic("error", message, node.line, node.col))

    def warning(self, node: Node, message: str):
        self.diagnostics.append(ParseDiagnostic("warning", message, node.line, node.col))

    # --- commands ---

    def command(self, node: Node):
        name = _head(node)
        if name is None:
            raise ParseError.at(node, "expected a command")
        args = node.items[1:]
        if self.seen_check_sat and name not in IGNORED_COMMANDS:
            self.warning(node, f"command {name} after check-sat")
        if name == "set-logic":
            if len(args) != 1:
                raise ParseError.at(node, "set-logic expects one symbol")
            self.logic = _symbol(args[0], "logic name")
            if self.logic != "HORN":
                self.warning(node, f"logic {self.logic} is not HORN")
        elif name == "declare-fun":
            self.declare(node, args)
        elif name == "assert":
            if len(args) != 1:
                raise ParseError.at(node, "assert expects one term")
            self.seen_assert = True
            self.clauses.append(self.clause(args[0]))
            self.positions.append((node.line, node.col))
        elif name == "check-sat":
            self.seen_check_sat = True
        elif name in IGNORED_COMMANDS:
            logger.debug("ignoring %s at %d:%d in %s", name, node.line, node.col, self.origin or "<input>")
            self.warning(node, f"ignoring command {name}")
        elif name in UNSUPPORTED_COMMANDS:
            raise ParseError.at(node, f"unsupported command {name}")
        else:
            raise ParseError.at(node, f"unknown command {name}")

    def declare(self, node: Node, args: List[Node]):
        if len(args) != 3 or not isinstance(args[1], SExpr):
            raise ParseError.at(node, "declare-fun expects a name, an argument sort list and a result sort")
        name = _symbol(args[0], "predicate name")
        if name in THEORY_OPS or name in _RESERVED:
            raise ParseError.at(args[0], f"cannot redeclare reserved symbol {name}")
        arg_sorts = tuple(self.sort(s) for s in args[1].items)
        if self.sort(args[2]) != BOOL:
            raise ParseError.at(args[2], f"predicate {name} must have result sort Bool")
        if name in self.decls:
            raise ParseError.at(args[0], f"predicate {name} declared more than once")
        if self.seen_assert:
            self.warning(node, f"predicate {name} declared after the first assert")
        decl = PredicateDecl(name, arg_sorts)
        self.decls[name] = decl
        self.decl_order.append(decl)

    def sort(self, node: Node) -> Sort:
        if isinstance(node, Token):
            if node.kind is TokenKind.SYMBOL and node.text in ("Bool", "Int", "Real"):
                return {"Bool": BOOL, "Int": INT, "Real": REAL}[node.text]
            raise ParseError.at(node, f"unsupported sort {node.text}")
        if _head(node) == "Array" and len(node.items) == 3:
            return array_sort(self.sort(node.items[1]), self.sort(node.items[2]))
        raise ParseError.at(node, "unsupported sort")

    # --- clauses ---

    def clause(self, node: Node) -> Clause:
        while _head(node) == "!" and len(node.items) >= 2:
            node = node.items[1]
        if _head(node) == "forall":
            if len(node.items) != 3 or not isinstance(node.items[1], SExpr) or not node.items[1].items:
                raise ParseError.at(node, "forall expects a non-empty variable list and a body")
            var_list: List[Tuple[str, Sort]] = []
            for binding in node.items[1].items:
                if not isinstance(binding, SExpr) or len(binding.items) != 2:
                    raise ParseError.at(binding, "malformed quantified variable")
                name = _symbol(binding.items[0], "variable name")
                if name in self.decls:
                    raise ParseError.at(binding, f"variable {name} shadows a predicate")
                if any(name == v for v, _ in var_list):
                    raise ParseError.at(binding, f"variable {name} bound twice")
                var_list.append((name, self.sort(binding.items[1])))
            body_node = node.items[2]
        else:
            var_list = []
            body_node = node
        variables = tuple(var_list)
        scope = {name: Var(name) for name, _ in variables}
        matrix = self.term(body_node, scope)
        return self.partition(matrix, variables, body_node)

    def partition(self, matrix: Term, variables: Tuple[Tuple[str, Sort], ...], node: Node) -> Clause:
        if isinstance(matrix, App) and matrix.op == "not":
            raise ParseError.at(node, "negated clause encodings are not accepted; run normalizer first")
        if isinstance(matrix, App) and matrix.op == "=>":
            if len(matrix.args) != 2:
                raise ParseError.at(node, "=> in a clause must have exactly one body and one head")
            body, head = matrix.args
        else:
            body, head = TRUE, matrix

        if head != FALSE and not isinstance(head, PredApp):
            raise ParseError.at(node, "head is neither a predicate atom nor false")

        atoms: List[PredApp] = []
        constraint: List[Term] = []
        for conj in conjuncts(body):
            if isinstance(conj, PredApp):
                atoms.append(conj)
            elif pred_apps(conj):
                raise ParseError.at(node, "uninterpreted predicate nested inside a constraint")
            else:
                constraint.append(conj)
        clause = Clause(variables, tuple(atoms), conjunction(constraint), head)

        var_sorts = dict(variables)
        for t in clause.terms():
            try:
                s = sort_of(t, var_sorts, self.decls)
            except SortError as e:
                raise ParseError.at(node, str(e))
            if s != BOOL:
                raise ParseError.at(node, "clause component is not Bool")
        if any(isinstance(sub, App) and sub.op == "*" and sum(1 for a in sub.args if free_vars(a)) > 1
               for t in clause.terms() for sub in iter_subterms(t)):
            self.warning(node, "non-linear multiplication")
        return clause

    def term(self, node: Node, scope: Mapping[str, Term]) -> Term:
        if isinstance(node, Token):
            return self.atom(node, scope)
        if not node.items:
            raise ParseError.at(node, "empty application")
        head = node.items[0]
        args = node.items[1:]
        if isinstance(head, SExpr):
            raise ParseError.at(head, "unsupported higher-order application")
        if head.kind is not TokenKind.SYMBOL:
            raise ParseError.at(head, f"expected a function symbol, got {head.text!r}")
        op = head.text
        if op == "let":
            return self.let(node, scope)
        if op == "!":
            if not args:
                raise ParseError.at(node, "annotation without a term")
            for attr in args[1:]:
                if isinstance(attr, Token) and attr.kind is TokenKind.KEYWORD and attr.text != ":named":
                    raise ParseError.at(attr, f"unsupported attribute {attr.text}")
            return self.term(args[0], scope)
        if op == "exists":
            raise ParseError.at(node, "existential quantification is not supported in clause bodies")
        if op == "forall":
            raise ParseError.at(node, "nested universal quantifier")
        if op == "_" or op == "as":
            raise ParseError.at(node, f"unsupported construct {op}")
        sub = tuple(self.term(a, scope) for a in args)
        if op in self.decls:
            return PredApp(op, sub)
        if op in THEORY_OPS:
            if op == "=>" and len(sub) > 2:
                # right-associative chain
                tail = sub[-1]
                for a in reversed(sub[1:-1]):
                    tail = App("=>", (a, tail))
                return App("=>", (sub[0], tail))
            return App(op, sub)
        raise ParseError.at(head, f"undeclared predicate {op}")

    def let(self, node: SExpr, scope: Mapping[str, Term]) -> Term:
        if len(node.items) != 3 or not isinstance(node.items[1], SExpr):
            raise ParseError.at(node, "let expects a binding list and a body")
        inner = dict(scope)
        for binding in node.items[1].items:
            if not isinstance(binding, SExpr) or len(binding.items) != 2:
                raise ParseError.at(binding, "malformed let binding")
            name = _symbol(binding.items[0], "let variable")
            inner[name] = self.term(binding.items[1], scope)
        return self.term(node.items[2], inner)

    def atom(self, tok: Token, scope: Mapping[str, Term]) -> Term:
        if tok.kind is TokenKind.NUMERAL:
            return Num(Fraction(int(tok.text)))
        if tok.kind is TokenKind.DECIMAL:
            return Num(Fraction(tok.text), decimal=True)
        if tok.kind is not TokenKind.SYMBOL:
            raise ParseError.at(tok, f"unexpected {tok.kind.value} {tok.text!r}")
        if tok.text in scope:
            return scope[tok.text]
        if tok.text in ("true", "false"):
            return TRUE if tok.text == "true" else FALSE
        if tok.text in self.decls:
            return PredApp(tok.text)
        raise ParseError.at(tok, f"unbound variable {tok.text}")

    def benchmark(self) -> Benchmark:
        return Benchmark(self.logic, tuple(self.decl_order), tuple(self.clauses), self.origin,
                         positions=tuple(self.positions))


def parse_benchmark(source: str, origin: str = "") -> Tuple[Optional[Benchmark], List[ParseDiagnostic]]:
    """Parse a CHC script.

    Returns the benchmark and the diagnostics; the benchmark is None when at
    least one error diagnostic was produced. Never raises on malformed input.
    """
    converter = _Converter(origin)
    try:
        nodes = read_sexprs(tokenize(source))
    except (LexError, ParseError) as e:
        return None, [ParseDiagnostic("error", str(e), e.line, e.col)]

    for node in nodes:
        try:
            converter.command(node)
        except ParseError as e:
            converter.diagnostics.append(ParseDiagnostic("error", str(e), e.line, e.col))
        except RecursionError:
            converter.error(node, "term nesting too deep")

    if not converter.seen_check_sat and not any(d.severity == "error" for d in converter.diagnostics):
        last_line = max(1, source.count("\n") + 1)
        converter.diagnostics.append(ParseDiagnostic("warning", "missing (check-sat)", last_line, 1))

    if any(d.severity == "error" for d in converter.diagnostics):
        return None, converter.diagnostics
    return converter.benchmark(), converter.diagnostics


def read_benchmark_file(file_path: str, origin: Optional[str] = None
                        ) -> Tuple[Optional[Benchmark], List[ParseDiagnostic]]:
    """Read and parse a `.smt2` file."""
    try:
        with open(file_path, 'rb') as f:
            raw = f.read()
    except FileNotFoundError:
        raise FileNotFoundError(f"Benchmark file not found: {file_path}")
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        col = e.start - raw.rfind(b"\n", 0, e.start)
        return None, [ParseDiagnostic("error", f"invalid UTF-8: {e.reason}", line, col)]
    return parse_benchmark(text, file_path if origin is None else origin)


# === CANONICAL PRINTER ===

def format_symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.fullmatch(name) and name not in _RESERVED:
        return name
    return f"|{name}|"


def _format_num(num: Num) -> str:
    magnitude = abs(num.value)
    if num.decimal:
        text = exact_decimal(magnitude)
        if text is None:
            text = f"(/ {magnitude.numerator}.0 {magnitude.denominator}.0)"
    else:
        text = str(magnitude.numerator)
    return f"(- {text})" if num.value < 0 else text


def format_term(term: Term, names: Mapping[str, str]) -> str:
    """Print a term with an explicit stack, so nesting depth is bounded only by memory."""
    out: List[str] = []
    stack: List[Union[Term, str]] = [term]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, Var):
            out.append(names.get(item.name, format_symbol(item.name)))
        elif isinstance(item, Num):
            out.append(_format_num(item))
        elif isinstance(item, PredApp) and not item.args:
            out.append(format_symbol(item.name))
        elif isinstance(item, App) and not item.args:
            out.append(item.op if item.op in ("true", "false") else f"({item.op})")
        else:
            out.append("(" + (item.op if isinstance(item, App) else format_symbol(item.name)))
            stack.append(")")
            for arg in reversed(item.args):
                stack.append(arg)
                stack.append(" ")
    return "".join(out)


def _alpha_names(clause: Clause) -> Dict[str, str]:
    order: List[str] = []
    seen = set()
    for t in clause.terms():
        for sub in iter_subterms(t):
            if isinstance(sub, Var) and sub.name not in seen:
                seen.add(sub.name)
                order.append(sub.name)
    for name, _ in clause.vars:
        if name not in seen:
            seen.add(name)
            order.append(name)
    return {name: f"v{i}" for i, name in enumerate(order)}


def format_clause(clause: Clause) -> str:
    names = _alpha_names(clause)
    sorts = clause.var_sorts()
    parts = [format_term(a, names) for a in clause.body_atoms]
    parts += [format_term(c, names) for c in conjuncts(clause.constraint)]
    head = format_term(clause.head, names)
    if not parts:
        matrix = head
    elif len(parts) == 1:
        matrix = f"(=> {parts[0]} {head})"
    else:
        matrix = f"(=> (and {' '.join(parts)}) {head})"
    if not clause.vars:
        return matrix
    ordered = sorted(clause.vars, key=lambda v: int(names[v[0]][1:]))
    bindings = " ".join(f"({names[name]} {sorts[name]})" for name, _ in ordered)
    return f"(forall ({bindings}) {matrix})"


def print_canonical(benchmark: Benchmark) -> str:
    """Deterministic serialization: one command per line, alpha-renamed variables, no comments."""
    lines = [f"(set-logic {format_symbol(benchmark.logic_name)})"]
    for decl in benchmark.decls:
        sorts = " ".join(str(s) for s in decl.arg_sorts)
        lines.append(f"(declare-fun {format_symbol(decl.name)} ({sorts}) Bool)")
    for clause in benchmark.clauses:
        lines.append(f"(assert {format_clause(clause)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def alpha_rename(benchmark: Benchmark) -> Benchmark:
    """Rename every clause's variables to the v0, v1, ... names the canonical printer uses."""
    clauses = []
    for clause in benchmark.clauses:
        names = _alpha_names(clause)
        mapping = {old: Var(new) for old, new in names.items()}
        ordered = sorted(clause.vars, key=lambda v: int(names[v[0]][1:]))
        clauses.append(Clause(
            tuple((names[name], sort) for name, sort in ordered),
            tuple(substitute(a, mapping) for a in clause.body_atoms),
            substitute(clause.constraint, mapping),
            substitute(clause.head, mapping),
        ))
    return benchmark.with_clauses(clauses)


def alpha_equivalent(a: Benchmark, b: Benchmark) -> bool:
    """Equal up to a consistent renaming of each clause's bound variables."""
    ra, rb = alpha_rename(a), alpha_rename(b)
    return (ra.logic_name, ra.decls, ra.clauses) == (rb.logic_name, rb.decls, rb.clauses)
