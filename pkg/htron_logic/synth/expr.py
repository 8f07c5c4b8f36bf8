"""Boolean expressions in prefix notation, e.g. `maj(a, not(b), c)`."""

import dataclasses
import enum
import functools
import logging
import re
import typing

from htron_logic.errors import ExpressionError

logger = logging.getLogger(__name__)


class Op(enum.Enum):
    VAR = "var"
    CONST = "const"
    NOT = "not"
    AND = "and"
    OR = "or"
    MAJ = "maj"
    XOR = "xor"


_ARITY = {Op.NOT: (1, 1), Op.MAJ: (3, 3), Op.AND: (2, None), Op.OR: (2, None), Op.XOR: (2, None)}


@dataclasses.dataclass(frozen=True)
class Expr:
    op: Op
    args: tuple["Expr", ...] = ()
    name: typing.Optional[str] = None
    """Variable name for VAR nodes."""
    value: typing.Optional[int] = None
    """0 or 1 for CONST nodes."""

    def __post_init__(self):
        if self.op is Op.VAR and not self.name:
            raise ExpressionError("variable without a name")
        if self.op is Op.CONST and self.value not in (0, 1):
            raise ExpressionError(f"constant must be 0 or 1, got {self.value!r}")
        if self.op in _ARITY:
            low, high = _ARITY[self.op]
            if len(self.args) < low or (high is not None and len(self.args) > high):
                raise ExpressionError(
                    f"{self.op.value} takes {low if low == high else f'at least {low}'} "
                    f"argument(s), got {len(self.args)}"
                )

    def __str__(self) -> str:
        if self.op is Op.VAR:
            return self.name
        if self.op is Op.CONST:
            return str(self.value)
        return f"{self.op.value}({', '.join(str(a) for a in self.args)})"

    @functools.cached_property
    def variables(self) -> tuple[str, ...]:
        """Variable names in order of first appearance."""
        if self.op is Op.VAR:
            return (self.name,)
        seen: dict[str, None] = {}
        for arg in self.args:
            seen.update(dict.fromkeys(arg.variables))
        return tuple(seen)

    def evaluate(self, env: typing.Mapping[str, int]) -> int:
        if self.op is Op.VAR:
            try:
                return int(env[self.name])
            except KeyError:
                raise ExpressionError(f"no value for variable '{self.name}'") from None
        if self.op is Op.CONST:
            return self.value
        values = [a.evaluate(env) for a in self.args]
        if self.op is Op.NOT:
            return 1 - values[0]
        if self.op is Op.AND:
            return int(all(values))
        if self.op is Op.OR:
            return int(any(values))
        if self.op is Op.XOR:
            return sum(values) % 2
        return int(sum(values) >= 2)


def var(name: str) -> Expr:
    return Expr(Op.VAR, name=name)


def const(value: int) -> Expr:
    return Expr(Op.CONST, value=int(value))


def not_(arg: Expr) -> Expr:
    return Expr(Op.NOT, (arg,))


def and_(*args: Expr) -> Expr:
    return Expr(Op.AND, tuple(args))


def or_(*args: Expr) -> Expr:
    return Expr(Op.OR, tuple(args))


def xor(*args: Expr) -> Expr:
    return Expr(Op.XOR, tuple(args))


def maj(a: Expr, b: Expr, c: Expr) -> Expr:
    return Expr(Op.MAJ, (a, b, c))


_token_pattern = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<const>[01])\b|(?P<punct>[(),]))")

_FUNCTIONS = {op.value: op for op in (Op.NOT, Op.AND, Op.OR, Op.MAJ, Op.XOR)}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        position = 0
        while True:
            match = _token_pattern.match(text, position)
            if not match:
                rest = text[position:]
                if rest.strip():
                    offset = position + len(rest) - len(rest.lstrip())
                    self._fail(f"unexpected '{text[offset]}'", offset)
                break
            kind = match.lastgroup
            start = match.start(kind)
            self.tokens.append((kind, match.group(kind), start))
            position = match.end()
        self.index = 0

    def _fail(self, message: str, offset: int) -> typing.NoReturn:
        line = self.text.count("\n", 0, offset) + 1
        column = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        raise ExpressionError(message, line, column)

    def _peek(self):
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return ("end", "", len(self.text))

    def _take(self, text: typing.Optional[str] = None):
        token = self._peek()
        if text is not None and token[1] != text:
            found = "end of input" if token[0] == "end" else f"'{token[1]}'"
            self._fail(f"expected '{text}', found {found}", token[2])
        self.index += 1
        return token

    def parse(self) -> Expr:
        expr = self._expr()
        kind, text, offset = self._peek()
        if kind != "end":
            self._fail(f"unexpected '{text}' after expression", offset)
        return expr

    def _expr(self) -> Expr:
        kind, text, offset = self._peek()
        if kind == "end":
            self._fail("expected an expression, found end of input", offset)
        if kind == "const":
            self._take()
            return const(int(text))
        if kind != "name":
            self._fail(f"expected an expression, found '{text}'", offset)

        self._take()
        if self._peek()[1] != "(":
            return var(text)
        op = _FUNCTIONS.get(text.lower())
        if op is None:
            self._fail(f"unknown function '{text}'", offset)

        self._take("(")
        args = [self._expr()]
        while self._peek()[1] == ",":
            self._take()
            args.append(self._expr())
        self._take(")")
        try:
            return Expr(op, tuple(args))
        except ExpressionError as e:
            self._fail(e.message, offset)


def parse_expression(text: str) -> Expr:
    return _Parser(text).parse()


def _flatten(op: Op, args: typing.Iterable[Expr]) -> list[Expr]:
    result = []
    for arg in args:
        if arg.op is op:
            result.extend(arg.args)
        else:
            result.append(arg)
    return result


def _unique(args: typing.Iterable[Expr]) -> list[Expr]:
    return list(dict.fromkeys(args))


def simplify(expr: Expr) -> Expr:
    """Fold constants, drop double negations and rewrite MAJ with a constant input."""
    if expr.op in (Op.VAR, Op.CONST):
        return expr
    args = [simplify(a) for a in expr.args]

    if expr.op is Op.NOT:
        (arg,) = args
        if arg.op is Op.CONST:
            return const(1 - arg.value)
        if arg.op is Op.NOT:
            return arg.args[0]
        return not_(arg)

    if expr.op in (Op.AND, Op.OR):
        # the absorbing constant of AND is 0, of OR is 1
        absorbing = 0 if expr.op is Op.AND else 1
        args = _flatten(expr.op, args)
        if any(a.op is Op.CONST and a.value == absorbing for a in args):
            return const(absorbing)
        args = _unique(a for a in args if a.op is not Op.CONST)
        if not args:
            return const(1 - absorbing)
        if len(args) == 1:
            return args[0]
        return Expr(expr.op, tuple(args))

    if expr.op is Op.XOR:
        args = _flatten(Op.XOR, args)
        parity = sum(a.value for a in args if a.op is Op.CONST) % 2
        args = [a for a in args if a.op is not Op.CONST]
        if not args:
            return const(parity)
        result = args[0] if len(args) == 1 else xor(*args)
        return simplify(not_(result)) if parity else result

    a, b, c = args
    if a == b or a == c:
        return a
    if b == c:
        return b
    consts = [x for x in args if x.op is Op.CONST]
    if consts:
        rest = [x for x in args if x.op is not Op.CONST]
        if len(consts) >= 2:
            # two of three constants decide unless they disagree
            values = [x.value for x in consts]
            if values[0] == values[1]:
                return consts[0]
            return rest[0] if rest else const(int(sum(values) >= 2))
        joined = and_(*rest) if consts[0].value == 0 else or_(*rest)
        return simplify(joined)
    return maj(a, b, c)
