"""Reader and writer for the line-oriented `.hnl` netlist format.

    # comment
    netlist full_adder;
    input a b c;
    output s;
    tie one=1;
    gate g1 MAJ3 a b c -> s bias=10;

Statements end with ';' and may share or span lines. Gate attributes are optional;
`bias` is I_B1 in μA, `ib2` the channel bias in μA and `rload` the load in ohms.
"""

import dataclasses
import logging
import math
import pathlib
import re
import typing

import networkx as nx

from htron_logic import textio
from htron_logic.errors import ConfigurationError, NetlistError
from htron_logic.gates import DEFAULT_I_B2, DEFAULT_R_LOAD, BiasConfig, GateKind, bias_for
from htron_logic.netlist.models import DEFAULT_SPLITTER_FANOUT, Gate, Netlist, validate

logger = logging.getLogger(__name__)

DEFAULT_NAME = "top"

_token_pattern = re.compile(r"->|;|[^\s;]+")
_name_pattern = re.compile(r"[A-Za-z_][A-Za-z0-9_.\[\]$]*")
_attr_pattern = re.compile(r"(?P<key>[a-z0-9_]+)=(?P<value>.*)")


@dataclasses.dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


class HnlReader:
    """Turns `.hnl` text into a validated netlist, reporting errors with their location."""

    def __init__(
        self,
        allow_fanout: bool = False,
        splitter_fanout: int = DEFAULT_SPLITTER_FANOUT,
    ):
        self._allow_fanout = allow_fanout
        self._splitter_fanout = splitter_fanout

    def read(self, text: str) -> Netlist:
        name = None
        inputs: list[str] = []
        outputs: list[str] = []
        ties: list[tuple[str, int]] = []
        gates: list[Gate] = []
        locations: dict[tuple, tuple[int, int]] = {}

        for statement, end in self._statements(text):
            keyword = statement[0]
            args = statement[1:]
            where = (keyword.line, keyword.column)

            if keyword.text == "netlist":
                if len(args) != 1:
                    self._fail("expected 'netlist <name>;'", keyword)
                if name is not None:
                    self._fail("netlist name declared twice", keyword)
                name = self._name(args[0])

            elif keyword.text == "input":
                for token in args:
                    net = self._name(token)
                    locations.setdefault(("input", net), (token.line, token.column))
                    inputs.append(net)

            elif keyword.text == "output":
                for token in args:
                    net = self._name(token)
                    locations.setdefault(("output", net), (token.line, token.column))
                    outputs.append(net)

            elif keyword.text == "tie":
                if not args:
                    self._fail("expected 'tie <net>=<0|1>;'", end)
                for token in args:
                    net, _, level = token.text.partition("=")
                    if level not in ("0", "1"):
                        self._fail(f"expected '<net>=0' or '<net>=1', got '{token.text}'", token)
                    net = self._name(Token(net, token.line, token.column))
                    locations.setdefault(("tie", net), (token.line, token.column))
                    ties.append((net, int(level)))

            elif keyword.text == "gate":
                gate = self._gate(keyword, args, end, locations)
                locations.setdefault(("gate", gate.id), where)
                gates.append(gate)

            else:
                self._fail(f"unknown statement '{keyword.text}'", keyword)

        netlist = Netlist(
            name=name or DEFAULT_NAME,
            primary_inputs=tuple(inputs),
            primary_outputs=tuple(outputs),
            gates=tuple(gates),
            ties=tuple(ties),
        )
        return validate(
            netlist,
            allow_fanout=self._allow_fanout,
            splitter_fanout=self._splitter_fanout,
            locations=locations,
        )

    def _statements(self, text: str) -> typing.Iterator[tuple[list[Token], Token]]:
        current: list[Token] = []
        for line_index, line in enumerate(text.split("\n")):
            content = line.split("#", 1)[0]
            for match in _token_pattern.finditer(content):
                token = Token(match.group(0), line_index + 1, match.start() + 1)
                if token.text == ";":
                    if current:
                        yield current, token
                    current = []
                else:
                    current.append(token)
        if current:
            self._fail("missing ';' at end of statement", current[-1])

    def _gate(self, keyword: Token, args: list[Token], end: Token, locations) -> Gate:
        if len(args) < 2:
            self._fail("expected 'gate <id> <KIND> <inputs...> -> <output>;'", end)
        gate_id = self._name(args[0])
        try:
            kind = GateKind.parse(args[1].text)
        except ConfigurationError as e:
            raise NetlistError(str(e), args[1].line, args[1].column) from None

        arrows = [i for i, t in enumerate(args) if t.text == "->"]
        if len(arrows) != 1:
            self._fail("gate needs exactly one '->'", keyword)
        arrow = arrows[0]
        in_tokens = args[2:arrow]
        rest = args[arrow + 1 :]
        if not rest:
            self._fail("missing output net after '->'", args[arrow])

        output = self._name(rest[0])
        for pin, token in enumerate(in_tokens):
            locations.setdefault(("read", gate_id, pin), (token.line, token.column))
        inputs = tuple(self._name(t) for t in in_tokens)

        values = {"bias": None, "ib2": DEFAULT_I_B2, "rload": DEFAULT_R_LOAD}
        for token in rest[1:]:
            match = _attr_pattern.fullmatch(token.text)
            if not match or match.group("key") not in values:
                self._fail(f"unexpected '{token.text}'", token)
            try:
                value = float(match.group("value"))
            except ValueError:
                value = math.nan
            if not math.isfinite(value):
                self._fail(f"'{match.group('value')}' is not a number", token)
            values[match.group("key")] = value

        try:
            if values["bias"] is None:
                bias = bias_for(kind, i_b2=values["ib2"], r_load=values["rload"])
            else:
                bias = BiasConfig(kind, values["bias"], values["ib2"], values["rload"])
        except ConfigurationError as e:
            raise NetlistError(str(e), keyword.line, keyword.column) from None

        return Gate(gate_id, kind, inputs, output, bias)

    def _name(self, token: Token) -> str:
        if token.text == "->" or not _name_pattern.fullmatch(token.text):
            self._fail(f"'{token.text}' is not a valid name", token)
        return token.text

    def _fail(self, message: str, token: Token) -> typing.NoReturn:
        raise NetlistError(message, token.line, token.column)


def parse(
    text: str,
    allow_fanout: bool = False,
    splitter_fanout: int = DEFAULT_SPLITTER_FANOUT,
) -> Netlist:
    return HnlReader(allow_fanout, splitter_fanout).read(text)


def read_file(file_path: typing.Union[str, pathlib.Path], **kwargs) -> Netlist:
    netlist = parse(textio.read_text(file_path), **kwargs)
    logger.info(
        "Read netlist '%s' with %d gates from '%s'.",
        netlist.name,
        len(netlist.gates),
        file_path,
    )
    return netlist


def serialize(netlist: Netlist) -> str:
    """Canonical text: declarations first, then gates in topological order."""
    fmt = textio.format_number
    lines = [f"netlist {netlist.name};"]
    if netlist.primary_inputs:
        lines.append("input " + " ".join(netlist.primary_inputs) + ";")
    if netlist.primary_outputs:
        lines.append("output " + " ".join(netlist.primary_outputs) + ";")
    for net, level in netlist.ties:
        lines.append(f"tie {net}={level};")

    order = nx.lexicographical_topological_sort(netlist.graph(), key=str)
    for gate_id in order:
        gate = netlist.gate_by_id[gate_id]
        parts = ["gate", gate.id, gate.kind.value, *gate.inputs, "->", gate.output]
        parts.append(f"bias={fmt(gate.bias.i_b1)}")
        if gate.bias.i_b2 != DEFAULT_I_B2:
            parts.append(f"ib2={fmt(gate.bias.i_b2)}")
        if gate.bias.r_load != DEFAULT_R_LOAD:
            parts.append(f"rload={fmt(gate.bias.r_load)}")
        lines.append(" ".join(parts) + ";")

    return "\n".join(lines) + "\n"


def write_file(file_path: typing.Union[str, pathlib.Path], netlist: Netlist) -> None:
    textio.write_text(file_path, serialize(netlist))
