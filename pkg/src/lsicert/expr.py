"""Arithmetic expressions for user-supplied Hamiltonians.

A recursive-descent parser over ``x1..xn`` with ``+ - * / ^``, parentheses,
decimal literals and the functions ``exp``, ``log``, ``cosh``, ``abs``.
Trees evaluate on numpy arrays and differentiate symbolically, so the
mixed partials needed for the beta matrices are exact.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import ExprSyntaxError, UnknownFunction, UnknownVariable

PARSEABLE_FUNCTIONS = ("exp", "log", "cosh", "abs")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class Node:
    def eval(self, env):
        raise NotImplementedError

    def diff(self, k: int) -> "Node":
        raise NotImplementedError

    def variables(self) -> set:
        return set()


class Num(Node):
    def __init__(self, value: float):
        self.value = float(value)

    def eval(self, env):
        return self.value

    def diff(self, k):
        return ZERO

    def __str__(self):
        return repr(self.value) if self.value >= 0 else f"({self.value!r})"


ZERO = Num(0.0)
ONE = Num(1.0)


class Var(Node):
    def __init__(self, k: int):
        self.k = k

    def eval(self, env):
        return env[self.k]

    def diff(self, k):
        return ONE if k == self.k else ZERO

    def variables(self):
        return {self.k}

    def __str__(self):
        return f"x{self.k + 1}"


class Neg(Node):
    def __init__(self, arg):
        self.arg = arg

    def eval(self, env):
        return -self.arg.eval(env)

    def diff(self, k):
        return neg(self.arg.diff(k))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"(-{self.arg})"


class BinOp(Node):
    symbol = "?"

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} {self.symbol} {self.right})"


class Add(BinOp):
    symbol = "+"

    def eval(self, env):
        return self.left.eval(env) + self.right.eval(env)

    def diff(self, k):
        return add(self.left.diff(k), self.right.diff(k))


class Sub(BinOp):
    symbol = "-"

    def eval(self, env):
        return self.left.eval(env) - self.right.eval(env)

    def diff(self, k):
        return sub(self.left.diff(k), self.right.diff(k))


class Mul(BinOp):
    symbol = "*"

    def eval(self, env):
        return self.left.eval(env) * self.right.eval(env)

    def diff(self, k):
        return add(mul(self.left.diff(k), self.right), mul(self.left, self.right.diff(k)))


class Div(BinOp):
    symbol = "/"

    def eval(self, env):
        return self.left.eval(env) / self.right.eval(env)

    def diff(self, k):
        num = sub(mul(self.left.diff(k), self.right), mul(self.left, self.right.diff(k)))
        return div(num, power(self.right, Num(2.0)))


class Pow(BinOp):
    symbol = "^"

    def eval(self, env):
        return np.power(self.left.eval(env), self.right.eval(env))

    def diff(self, k):
        base, expo = self.left, self.right
        if isinstance(expo, Num):
            return mul(mul(expo, power(base, Num(expo.value - 1.0))), base.diff(k))
        # u^v = exp(v log u)
        inner = add(mul(expo.diff(k), Func("log", base)), div(mul(expo, base.diff(k)), base))
        return mul(self, inner)


_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "abs": np.abs,
    "sign": np.sign,
}


class Func(Node):
    def __init__(self, name: str, arg: Node):
        self.name = name
        self.arg = arg

    def eval(self, env):
        return _FUNCS[self.name](self.arg.eval(env))

    def diff(self, k):
        inner = self.arg.diff(k)
        if isinstance(inner, Num) and inner.value == 0.0:
            return ZERO
        outer = {
            "exp": lambda u: Func("exp", u),
            "log": lambda u: div(ONE, u),
            "cosh": lambda u: Func("sinh", u),
            "sinh": lambda u: Func("cosh", u),
            "abs": lambda u: Func("sign", u),
            "sign": lambda u: ZERO,
        }[self.name](self.arg)
        return mul(outer, inner)

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"{self.name}({self.arg})"


# constant-folding constructors keep derivative trees small


def _is(node, value):
    return isinstance(node, Num) and node.value == value


def add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Add(a, b)


def sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return Sub(a, b)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    return Neg(a)


def mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return Mul(a, b)


def div(a, b):
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return Div(a, b)


def power(a, b):
    if _is(b, 0.0):
        return ONE
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value**b.value)
    return Pow(a, b)


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        tokens = []
        at = 0
        while at < len(text):
            if text[at:].strip() == "":
                break
            m = _TOKEN.match(text, at)
            if m is None or m.end() == at:
                col = at + len(text[at:]) - len(text[at:].lstrip())
                raise ExprSyntaxError(f"unexpected character {text[col]!r}", col)
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), start))
            at = m.end()
        tokens.append(("end", "", len(text)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        kind, text, col = self.take()
        if text != value:
            raise ExprSyntaxError(f"expected {value!r}, found {text or 'end of input'!r}", col)

    def parse(self):
        node = self.expr()
        kind, text, col = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", col)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            arg = self.unary()
            return Neg(arg) if op == "-" else arg
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self):
        kind, text, col = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if self.peek()[1] == "(":
                if text not in PARSEABLE_FUNCTIONS:
                    raise UnknownFunction(f"unknown function {text!r}", col)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            m = re.fullmatch(r"x(\d+)", text)
            if m is None or not 1 <= int(m.group(1)) <= self.n:
                raise UnknownVariable(f"unknown variable {text!r} (expected x1..x{self.n})", col)
            return Var(int(m.group(1)) - 1)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", col)


class HamiltonianExpr:
    """A parsed Hamiltonian over ``x1..xn``.

    Calling it with a sequence of ``n`` coordinate values (scalars or
    broadcastable arrays) evaluates ``V``.
    """

    def __init__(self, root: Node, n: int, text: str | None = None):
        self.root = root
        self.n = n
        self.text = text if text is not None else str(root)

    def __call__(self, x):
        env = [x[k] for k in range(self.n)]
        return self.root.eval(env)

    def partial(self, i: int) -> "HamiltonianExpr":
        self._check(i)
        return HamiltonianExpr(self.root.diff(i - 1), self.n)

    def second(self, i: int, k: int) -> "HamiltonianExpr":
        return self.partial(i).partial(k)

    @property
    def free_variables(self) -> set:
        """1-based indices of the variables that occur."""
        return {k + 1 for k in self.root.variables()}

    @property
    def is_constant(self) -> bool:
        return isinstance(self.root, Num)

    def _check(self, i):
        if not 1 <= i <= self.n:
            raise UnknownVariable(f"no variable x{i} in a {self.n}-variable expression")

    def __str__(self):
        return self.text

    def __repr__(self):
        return f"HamiltonianExpr({self.text!r}, n={self.n})"


def parse_hamiltonian(text: str, n: int) -> HamiltonianExpr:
    """Parse ``text`` as a function of ``x1..xn``."""
    return HamiltonianExpr(_Parser(text, n).parse(), n, text)
