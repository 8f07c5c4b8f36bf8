"""Technology mapping of Boolean expressions onto a gate basis and then onto hTron gates.

Mapping happens in two steps. The expression is first built as a network of basis
cells (MAJ3 and NOT, NAND2, ...) with structural hashing, which is what levels and
gate counts of a basis refer to. That network is then lowered to hTron gates: NAND2
becomes AND2 followed by NOT, NOR2 becomes OR2 followed by NOT, constants become tie
nets and fanout is legalized with COPY splitters.
"""

import dataclasses
import enum
import itertools
import logging
import typing

from htron_logic.errors import ConfigurationError, EquivalenceError, TooManyInputsError
from htron_logic.gates import GateKind
from htron_logic.netlist.models import DEFAULT_SPLITTER_FANOUT, Gate, Netlist, build
from htron_logic.netlist.splitters import insert_splitters
from htron_logic.synth.expr import Expr, Op, simplify

logger = logging.getLogger(__name__)

MAX_VARIABLES = 16

CONST0 = "<0>"
CONST1 = "<1>"


class Basis(enum.Enum):
    HTRON = "HTRON"
    MAJ_NOT = "MAJ_NOT"
    NAND2 = "NAND2"
    NOR2 = "NOR2"

    @classmethod
    def parse(cls, name: str) -> "Basis":
        try:
            return cls(name.upper().replace("-", "_"))
        except ValueError:
            known = ", ".join(b.value for b in cls)
            raise ConfigurationError(f"Unknown basis '{name}' (expected one of {known}).") from None


CELL_OPS = {
    Basis.HTRON: {"NOT", "AND2", "OR2", "MAJ3"},
    Basis.MAJ_NOT: {"NOT", "MAJ3"},
    Basis.NAND2: {"NAND2"},
    Basis.NOR2: {"NOR2"},
}

_COMMUTATIVE = {"AND2", "OR2", "MAJ3", "NAND2", "NOR2"}


def _cell_value(op: str, bits: typing.Sequence[int]) -> int:
    if op == "NOT":
        return 1 - bits[0]
    if op == "AND2":
        return bits[0] & bits[1]
    if op == "OR2":
        return bits[0] | bits[1]
    if op == "NAND2":
        return 1 - (bits[0] & bits[1])
    if op == "NOR2":
        return 1 - (bits[0] | bits[1])
    return int(sum(bits) >= 2)


@dataclasses.dataclass(frozen=True)
class Cell:
    output: str
    op: str
    inputs: tuple[str, ...]


@dataclasses.dataclass(frozen=True)
class CellNetwork:
    """Basis-level circuit; constants appear as the shared nets CONST0 and CONST1."""

    basis: Basis
    inputs: tuple[str, ...]
    outputs: tuple[tuple[str, str], ...]
    """(output name, driving net) pairs."""
    cells: tuple[Cell, ...]

    def levels(self) -> int:
        level = {net: 0 for net in self.inputs}
        level.update({CONST0: 0, CONST1: 0})
        for cell in self.cells:
            level[cell.output] = 1 + max(level[n] for n in cell.inputs)
        return max((level[net] for _, net in self.outputs), default=0)

    def evaluate(self, env: typing.Mapping[str, int]) -> dict[str, int]:
        values = {net: int(env[net]) for net in self.inputs}
        values.update({CONST0: 0, CONST1: 1})
        for cell in self.cells:
            values[cell.output] = _cell_value(cell.op, [values[n] for n in cell.inputs])
        return {name: values[net] for name, net in self.outputs}

    def cone(self, output: str) -> "CellNetwork":
        """The part of the network that drives one output."""
        net = dict(self.outputs)[output]
        by_output = {c.output: c for c in self.cells}
        needed = set()
        stack = [net]
        while stack:
            current = stack.pop()
            cell = by_output.get(current)
            if cell is None or current in needed:
                continue
            needed.add(current)
            stack.extend(cell.inputs)
        return CellNetwork(
            basis=self.basis,
            inputs=self.inputs,
            outputs=((output, net),),
            cells=tuple(c for c in self.cells if c.output in needed),
        )


class CellBuilder:
    """Builds a CellNetwork bottom-up, sharing structurally identical cells."""

    def __init__(self, basis: Basis, inputs: typing.Iterable[str] = ()):
        self.basis = basis
        self.inputs: list[str] = list(inputs)
        self.cells: list[Cell] = []
        self._hashed: dict[tuple, str] = {}
        self._negation: dict[str, str] = {}

    def input(self, name: str) -> str:
        if name in (CONST0, CONST1):
            raise ConfigurationError(f"'{name}' is reserved.")
        if name not in self.inputs:
            self.inputs.append(name)
        return name

    def const(self, value: int) -> str:
        return CONST1 if value else CONST0

    def cell(self, op: str, *inputs: str) -> str:
        if op not in CELL_OPS[self.basis]:
            raise ConfigurationError(f"{op} is not a cell of the {self.basis.value} basis.")
        key = (op, tuple(sorted(inputs)) if op in _COMMUTATIVE else inputs)
        if key not in self._hashed:
            net = f"n${len(self.cells)}"
            self.cells.append(Cell(net, op, tuple(inputs)))
            self._hashed[key] = net
        return self._hashed[key]

    # basis-specific realizations of the expression operators

    def not_(self, x: str) -> str:
        if x in (CONST0, CONST1):
            return CONST1 if x == CONST0 else CONST0
        if x in self._negation:
            return self._negation[x]
        if self.basis is Basis.NAND2:
            out = self.cell("NAND2", x, CONST1)
        elif self.basis is Basis.NOR2:
            out = self.cell("NOR2", x, CONST0)
        else:
            out = self.cell("NOT", x)
        self._negation[out] = x
        return out

    def and_(self, x: str, y: str) -> str:
        if x == y:
            return x
        if self.basis is Basis.HTRON:
            return self.cell("AND2", x, y)
        if self.basis is Basis.MAJ_NOT:
            return self.cell("MAJ3", x, y, CONST0)
        if self.basis is Basis.NAND2:
            return self.not_(self.cell("NAND2", x, y))
        return self.cell("NOR2", self.not_(x), self.not_(y))

    def or_(self, x: str, y: str) -> str:
        if x == y:
            return x
        if self.basis is Basis.HTRON:
            return self.cell("OR2", x, y)
        if self.basis is Basis.MAJ_NOT:
            return self.cell("MAJ3", x, y, CONST1)
        if self.basis is Basis.NAND2:
            return self.cell("NAND2", self.not_(x), self.not_(y))
        return self.not_(self.cell("NOR2", x, y))

    def xor(self, x: str, y: str) -> str:
        if x == y:
            return CONST0
        if self.basis is Basis.NAND2:
            n = self.cell("NAND2", x, y)
            return self.cell("NAND2", self.cell("NAND2", x, n), self.cell("NAND2", y, n))
        if self.basis is Basis.NOR2:
            n = self.cell("NOR2", x, y)
            xnor = self.cell("NOR2", self.cell("NOR2", x, n), self.cell("NOR2", y, n))
            return self.not_(xnor)
        return self.and_(self.or_(x, y), self.not_(self.and_(x, y)))

    def maj(self, x: str, y: str, z: str) -> str:
        if x == y or x == z:
            return x
        if y == z:
            return y
        if self.basis in (Basis.HTRON, Basis.MAJ_NOT):
            return self.cell("MAJ3", x, y, z)
        return self.or_(self.or_(self.and_(x, y), self.and_(x, z)), self.and_(y, z))

    def _balanced(self, combine, nets: list[str]) -> str:
        while len(nets) > 1:
            nets = [
                combine(nets[i], nets[i + 1]) if i + 1 < len(nets) else nets[i]
                for i in range(0, len(nets), 2)
            ]
        return nets[0]

    def expression(self, expr: Expr) -> str:
        if expr.op is Op.VAR:
            return self.input(expr.name)
        if expr.op is Op.CONST:
            return self.const(expr.value)
        args = [self.expression(a) for a in expr.args]
        if expr.op is Op.NOT:
            return self.not_(args[0])
        if expr.op is Op.MAJ:
            return self.maj(*args)
        combine = {Op.AND: self.and_, Op.OR: self.or_, Op.XOR: self.xor}[expr.op]
        return self._balanced(combine, args)

    def network(self, outputs: typing.Iterable[tuple[str, str]]) -> CellNetwork:
        outputs = tuple(outputs)
        for name, _ in outputs:
            if name in self.inputs:
                raise ConfigurationError(f"Output '{name}' has the name of an input.")

        # drop cells no output depends on
        needed = set()
        by_output = {c.output: c for c in self.cells}
        stack = [net for _, net in outputs]
        while stack:
            net = stack.pop()
            cell = by_output.get(net)
            if cell is not None and net not in needed:
                needed.add(net)
                stack.extend(cell.inputs)
        return CellNetwork(
            basis=self.basis,
            inputs=tuple(self.inputs),
            outputs=outputs,
            cells=tuple(c for c in self.cells if c.output in needed),
        )


_LOWERED = {
    "NOT": (GateKind.NOT,),
    "AND2": (GateKind.AND2,),
    "OR2": (GateKind.OR2,),
    "MAJ3": (GateKind.MAJ3,),
    "NAND2": (GateKind.AND2, GateKind.NOT),
    "NOR2": (GateKind.OR2, GateKind.NOT),
}


def lower(
    network: CellNetwork,
    name: str = "mapped",
    splitter_fanout: int = DEFAULT_SPLITTER_FANOUT,
) -> Netlist:
    """hTron netlist of a cell network, with tie nets for constants and splitters for fanout."""
    net_of = {net: net for net in network.inputs}
    for out_name, net in network.outputs:
        if net not in network.inputs and net not in (CONST0, CONST1):
            net_of.setdefault(net, out_name)
    gates: list[Gate] = []
    ties: list[tuple[str, int]] = []

    def pin(net: str) -> str:
        if net in (CONST0, CONST1):
            tie = f"tie${len(ties)}"
            ties.append((tie, 1 if net == CONST1 else 0))
            return tie
        return net_of[net]

    for cell in network.cells:
        inputs = tuple(pin(n) for n in cell.inputs)
        output = net_of.setdefault(cell.output, cell.output)
        kinds = _LOWERED[cell.op]
        if len(kinds) == 1:
            gates.append(Gate.nominal(f"g_{cell.output}", kinds[0], inputs, output))
        else:
            middle = f"{cell.output}_pre"
            gates.append(Gate.nominal(f"g_{cell.output}a", kinds[0], inputs, middle))
            gates.append(Gate.nominal(f"g_{cell.output}b", kinds[1], (middle,), output))

    outputs = []
    for out_name, net in network.outputs:
        if net in (CONST0, CONST1):
            ties.append((out_name, 1 if net == CONST1 else 0))
            outputs.append(out_name)
        else:
            outputs.append(net_of[net])

    netlist = build(
        name,
        network.inputs,
        outputs,
        gates,
        ties,
        allow_fanout=True,
        splitter_fanout=splitter_fanout,
    )
    return insert_splitters(netlist, splitter_fanout=splitter_fanout)


@dataclasses.dataclass(frozen=True)
class MappedCircuit:
    basis: Basis
    network: CellNetwork
    netlist: Netlist

    @property
    def levels(self) -> int:
        """Logic levels counted in basis cells."""
        return self.network.levels()

    @property
    def gate_count(self) -> int:
        return len(self.network.cells)

    @property
    def htron_levels(self) -> int:
        return self.netlist.depth()

    @property
    def htron_gates(self) -> int:
        return len(self.netlist.gates)


def certify(network: CellNetwork, references: typing.Mapping[str, Expr]) -> None:
    """Exhaustively compare a cell network with reference expressions."""
    if len(network.inputs) > MAX_VARIABLES:
        raise TooManyInputsError(
            f"{len(network.inputs)} inputs exceed the {MAX_VARIABLES} that can be "
            "checked exhaustively."
        )
    for bits in itertools.product((0, 1), repeat=len(network.inputs)):
        env = dict(zip(network.inputs, bits))
        got = network.evaluate(env)
        for name, reference in references.items():
            if got[name] != reference.evaluate(env):
                vector = "".join(str(b) for b in bits)
                raise EquivalenceError(
                    f"{network.basis.value} mapping of output '{name}' differs from "
                    f"{reference} at {vector}."
                )


def map_expression(
    expr: Expr,
    basis: Basis,
    output: str = "f",
    name: typing.Optional[str] = None,
    splitter_fanout: int = DEFAULT_SPLITTER_FANOUT,
) -> MappedCircuit:
    variables = expr.variables
    if len(variables) > MAX_VARIABLES:
        raise TooManyInputsError(
            f"Expression has {len(variables)} variables; at most {MAX_VARIABLES} are supported."
        )

    builder = CellBuilder(basis, variables)
    root = builder.expression(simplify(expr))
    network = builder.network([(output, root)])
    certify(network, {output: expr})

    netlist = lower(network, name or f"{basis.value.lower()}_map", splitter_fanout)
    circuit = MappedCircuit(basis=basis, network=network, netlist=netlist)
    logger.info(
        "Mapped %s onto %s: %d levels, %d cells (%d hTron levels, %d hTron gates).",
        expr,
        basis.value,
        circuit.levels,
        circuit.gate_count,
        circuit.htron_levels,
        circuit.htron_gates,
    )
    return circuit
