"""
CHC-COMP Toolkit - Core Model Module
Sorts, terms, clauses, benchmarks and track categories shared by all stages.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union


class ChcCompError(Exception):
    """Base class for all toolkit errors."""


class SortError(ChcCompError):
    """Raised when a term cannot be given a sort."""


# === SORTS ===

@dataclass(frozen=True)
class Sort:
    """A sort of the CHC fragment: Bool, Int, Real or (Array index element)."""
    kind: str
    index: Optional["Sort"] = None
    element: Optional["Sort"] = None

    def __post_init__(self):
        if self.kind not in ("Bool", "Int", "Real", "Array"):
            raise SortError(f"Unknown sort kind: {self.kind}")
        if (self.kind == "Array") != (self.index is not None and self.element is not None):
            raise SortError("Array sorts need both an index and an element sort")

    @property
    def is_array(self) -> bool:
        return self.kind == "Array"

    def __str__(self) -> str:
        if self.is_array:
            return f"(Array {self.index} {self.element})"
        return self.kind


BOOL = Sort("Bool")
INT = Sort("Int")
REAL = Sort("Real")


def array_sort(index: Sort, element: Sort) -> Sort:
    return Sort("Array", index, element)


# === TERMS ===

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    """Numeral (Int) or decimal (Real) literal, kept as an exact rational."""
    value: Fraction
    decimal: bool = False


@dataclass(frozen=True)
class App:
    """Application of an interpreted theory symbol."""
    op: str
    args: Tuple["Term", ...] = ()


@dataclass(frozen=True)
class PredApp:
    """Application of an uninterpreted (declared) predicate."""
    name: str
    args: Tuple["Term", ...] = ()


Term = Union[Var, Num, App, PredApp]

TRUE = App("true")
FALSE = App("false")

BOOL_OPS = frozenset({"and", "or", "not", "=>", "ite", "true", "false"})
ARITH_OPS = frozenset({"+", "-", "*", "div", "mod", "/"})
COMPARISON_OPS = frozenset({"<=", "<", ">=", ">", "="})
ARRAY_OPS = frozenset({"select", "store"})
THEORY_OPS = BOOL_OPS | ARITH_OPS | COMPARISON_OPS | ARRAY_OPS


def conjunction(terms: Iterable[Term]) -> Term:
    """Build a flat conjunction; the empty conjunction is `true`."""
    flat: List[Term] = []
    for t in terms:
        flat.extend(conjuncts(t))
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat))


def conjuncts(term: Term) -> List[Term]:
    """Top-level conjuncts of a term, flattening nested `and` and dropping `true`."""
    out: List[Term] = []
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, App) and t.op == "and":
            stack.extend(reversed(t.args))
        elif t != TRUE:
            out.append(t)
    return out


def iter_subterms(term: Term) -> Iterator[Term]:
    """Pre-order walk without recursion (fuzzed inputs can nest deeply)."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, (App, PredApp)):
            stack.extend(reversed(t.args))


def free_vars(term: Term) -> FrozenSet[str]:
    """Set of variable names occurring in a term."""
    return frozenset(t.name for t in iter_subterms(term) if isinstance(t, Var))


def pred_apps(term: Term) -> List[PredApp]:
    return [t for t in iter_subterms(term) if isinstance(t, PredApp)]


def substitute(term: Term, mapping: Mapping[str, Term]) -> Term:
    """Replace variables by terms, rebuilding applications bottom-up without recursion."""
    done: List[Term] = []
    stack: List[Tuple[Term, bool]] = [(term, False)]
    while stack:
        t, expanded = stack.pop()
        if isinstance(t, Var):
            done.append(mapping.get(t.name, t))
        elif not isinstance(t, (App, PredApp)) or not t.args:
            done.append(t)
        elif not expanded:
            stack.append((t, True))
            stack.extend((a, False) for a in reversed(t.args))
        else:
            start = len(done) - len(t.args)
            args = tuple(done[start:])
            del done[start:]
            done.append(replace(t, args=args))
    return done[0]


def exact_decimal(value: Fraction) -> Optional[str]:
    """Finite decimal expansion of a rational, or None when it does not terminate."""
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    places = max(twos, fives)
    digits = str(abs(value.numerator) * (10 ** places // value.denominator)).rjust(places + 1, "0")
    split = len(digits) - places
    text = digits[:split] + "." + (digits[split:] or "0")
    return "-" + text if value < 0 else text


def is_constant(term: Term) -> bool:
    """True if the term contains no variables and no predicate applications."""
    return all(not isinstance(t, (Var, PredApp)) for t in iter_subterms(term))


# === CLAUSES AND BENCHMARKS ===

@dataclass(frozen=True)
class PredicateDecl:
    name: str
    arg_sorts: Tuple[Sort, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class Clause:
    """forall vars. body_atoms /\\ constraint => head, with head a PredApp or False."""
    vars: Tuple[Tuple[str, Sort], ...]
    body_atoms: Tuple[PredApp, ...]
    constraint: Term
    head: Union[PredApp, App]

    def is_query(self) -> bool:
        return self.head == FALSE

    def is_linear(self) -> bool:
        return len(self.body_atoms) <= 1

    def is_fact(self) -> bool:
        return not self.body_atoms and not self.is_query()

    def var_sorts(self) -> Dict[str, Sort]:
        return dict(self.vars)

    def terms(self) -> List[Term]:
        out: List[Term] = list(self.body_atoms)
        out.append(self.constraint)
        out.append(self.head)
        return out


def is_linear(clause: Clause) -> bool:
    return clause.is_linear()


def is_query(clause: Clause) -> bool:
    return clause.is_query()


class TrackCategory(Enum):
    LIA_NONLIN = "LIA-nonlin"
    LIA_LIN = "LIA-lin"
    LIA_LIN_ARRAYS = "LIA-lin-arrays"
    LRA_TS = "LRA-TS"
    UNCLASSIFIED = "UNCLASSIFIED"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Benchmark:
    logic_name: str
    decls: Tuple[PredicateDecl, ...]
    clauses: Tuple[Clause, ...]
    origin: str = ""
    checksum: Optional[object] = field(default=None, compare=False)
    # (line, col) of each clause's assert in the source, when parsed from text
    positions: Tuple[Tuple[int, int], ...] = field(default=(), compare=False)

    def decl_map(self) -> Dict[str, PredicateDecl]:
        return {d.name: d for d in self.decls}

    def queries(self) -> List[Clause]:
        return [c for c in self.clauses if c.is_query()]

    def with_clauses(self, clauses: Iterable[Clause], decls: Optional[Iterable[PredicateDecl]] = None,
                     origin: Optional[str] = None) -> "Benchmark":
        return replace(
            self,
            clauses=tuple(clauses),
            decls=self.decls if decls is None else tuple(decls),
            origin=self.origin if origin is None else origin,
            checksum=None,
            positions=(),
        )


# === SORT INFERENCE AND WELL-FORMEDNESS ===

def _numeric(sort: Sort) -> bool:
    return sort in (INT, REAL)


def sort_of(term: Term, var_sorts: Mapping[str, Sort], decls: Mapping[str, PredicateDecl]) -> Sort:
    """Infer the sort of a term, raising SortError on the first violation."""
    if isinstance(term, Var):
        if term.name not in var_sorts:
            raise SortError(f"unbound variable {term.name}")
        return var_sorts[term.name]
    if isinstance(term, Num):
        return REAL if term.decimal else INT
    if isinstance(term, PredApp):
        decl = decls.get(term.name)
        if decl is None:
            raise SortError(f"undeclared predicate {term.name}")
        if decl.arity != len(term.args):
            raise SortError(f"predicate {term.name} expects {decl.arity} arguments, got {len(term.args)}")
        for i, (arg, expected) in enumerate(zip(term.args, decl.arg_sorts)):
            actual = sort_of(arg, var_sorts, decls)
            if actual != expected:
                raise SortError(f"argument {i + 1} of {term.name} has sort {actual}, expected {expected}")
        return BOOL
    if not isinstance(term, App):
        raise SortError(f"not a term: {term!r}")

    op, args = term.op, term.args
    if op not in THEORY_OPS:
        raise SortError(f"unknown function symbol {op}")
    arg_sorts = [sort_of(a, var_sorts, decls) for a in args]

    if op in ("true", "false"):
        if args:
            raise SortError(f"{op} takes no arguments")
        return BOOL
    if op in ("and", "or", "=>", "not"):
        if op == "not" and len(args) != 1:
            raise SortError("not takes exactly one argument")
        if op == "=>" and len(args) < 2:
            raise SortError("=> takes at least two arguments")
        if any(s != BOOL for s in arg_sorts):
            raise SortError(f"arguments of {op} must be Bool")
        return BOOL
    if op == "ite":
        if len(args) != 3 or arg_sorts[0] != BOOL or arg_sorts[1] != arg_sorts[2]:
            raise SortError("ite expects (ite Bool T T)")
        return arg_sorts[1]
    if op == "=":
        if len(args) < 2 or any(s != arg_sorts[0] for s in arg_sorts):
            raise SortError("arguments of = must have the same sort")
        return BOOL
    if op in ("<=", "<", ">=", ">"):
        if len(args) < 2 or not _numeric(arg_sorts[0]) or any(s != arg_sorts[0] for s in arg_sorts):
            raise SortError(f"sort mismatch in {op}: {' '.join(map(str, arg_sorts))}")
        return BOOL
    if op in ("+", "-", "*"):
        if not args or not _numeric(arg_sorts[0]) or any(s != arg_sorts[0] for s in arg_sorts):
            raise SortError(f"sort mismatch in {op}: {' '.join(map(str, arg_sorts))}")
        return arg_sorts[0]
    if op in ("div", "mod"):
        if len(args) != 2 or any(s != INT for s in arg_sorts):
            raise SortError(f"{op} expects two Int arguments")
        return INT
    if op == "/":
        if len(args) != 2 or any(s != REAL for s in arg_sorts):
            raise SortError("/ expects two Real arguments")
        return REAL
    if op == "select":
        if len(args) != 2 or not arg_sorts[0].is_array or arg_sorts[0].index != arg_sorts[1]:
            raise SortError("select expects (select (Array I E) I)")
        return arg_sorts[0].element
    # store
    if (len(args) != 3 or not arg_sorts[0].is_array or arg_sorts[0].index != arg_sorts[1]
            or arg_sorts[0].element != arg_sorts[2]):
        raise SortError("store expects (store (Array I E) I E)")
    return arg_sorts[0]


def clause_violations(clause: Clause, decls: Mapping[str, PredicateDecl]) -> List[str]:
    """Every well-formedness violation of one clause."""
    errors: List[str] = []
    names = [n for n, _ in clause.vars]
    if len(set(names)) != len(names):
        errors.append("duplicate quantified variable")
    var_sorts = clause.var_sorts()
    for atom in clause.body_atoms:
        if not isinstance(atom, PredApp):
            errors.append(f"body atom is not a predicate application: {atom!r}")
            continue
        try:
            sort_of(atom, var_sorts, decls)
        except SortError as e:
            errors.append(str(e))
    if pred_apps(clause.constraint):
        errors.append("constraint contains an uninterpreted predicate")
    try:
        if sort_of(clause.constraint, var_sorts, decls) != BOOL:
            errors.append("constraint is not Bool")
    except SortError as e:
        errors.append(str(e))
    if clause.head != FALSE:
        if not isinstance(clause.head, PredApp):
            errors.append("head is neither a predicate atom nor false")
        else:
            try:
                sort_of(clause.head, var_sorts, decls)
            except SortError as e:
                errors.append(str(e))
    return errors


def well_formedness_violations(benchmark: Benchmark) -> List[Tuple[Optional[int], str]]:
    """All declaration, arity and sort violations as (1-based clause number or None, message)."""
    errors: List[Tuple[Optional[int], str]] = []
    seen = set()
    for decl in benchmark.decls:
        if decl.name in seen:
            errors.append((None, f"predicate {decl.name} declared more than once"))
        seen.add(decl.name)
    decls = benchmark.decl_map()
    for i, clause in enumerate(benchmark.clauses, 1):
        errors.extend((i, msg) for msg in clause_violations(clause, decls))
    return errors


# === GROUND EVALUATION ===

def evaluate_ground(term: Term) -> Union[bool, Fraction]:
    """Evaluate a closed Bool/arithmetic term exactly."""
    if isinstance(term, Num):
        return term.value
    if isinstance(term, (Var, PredApp)):
        raise ValueError(f"term is not ground: {term!r}")
    op = term.op
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "ite":
        cond = evaluate_ground(term.args[0])
        return evaluate_ground(term.args[1] if cond else term.args[2])
    vals = [evaluate_ground(a) for a in term.args]
    if op == "and":
        return all(vals)
    if op == "or":
        return any(vals)
    if op == "not":
        return not vals[0]
    if op == "=>":
        result = vals[-1]
        for v in reversed(vals[:-1]):
            result = (not v) or result
        return result
    if op == "=":
        return all(v == vals[0] for v in vals[1:])
    if op in ("<=", "<", ">=", ">"):
        cmp = {"<=": lambda a, b: a <= b, "<": lambda a, b: a < b,
               ">=": lambda a, b: a >= b, ">": lambda a, b: a > b}[op]
        return all(cmp(a, b) for a, b in zip(vals, vals[1:]))
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        result = vals[0]
        for v in vals[1:]:
            result -= v
        return result
    if op == "*":
        result = Fraction(1)
        for v in vals:
            result *= v
        return result
    if op == "/":
        return vals[0] / vals[1]
    if op in ("div", "mod"):
        # SMT-LIB integer division: remainder is always non-negative
        a, b = vals
        q = a // b if b > 0 else -(a // -b)
        return q if op == "div" else a - b * q
    raise ValueError(f"cannot evaluate {op} on ground values")
