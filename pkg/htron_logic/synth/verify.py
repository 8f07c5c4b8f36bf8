import dataclasses
import itertools
import logging
import typing

from htron_logic.device.models import CalibrationTable, DeviceParams
from htron_logic.errors import EquivalenceError, TooManyInputsError
from htron_logic.gates import LogicEncoding
from htron_logic.netlist.models import Netlist
from htron_logic.simulator import steady_state
from htron_logic.synth.expr import Expr
from htron_logic.synth.mapper import MAX_VARIABLES

logger = logging.getLogger(__name__)


def depth(netlist: Netlist) -> int:
    """Gate levels on the longest input to output path; splitters count too."""
    return netlist.depth()


def gate_count(netlist: Netlist) -> int:
    return len(netlist.gates)


@dataclasses.dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    counterexample: typing.Optional[tuple[int, ...]] = None
    """First failing input vector, in primary input order."""
    checked: int = 0

    def __bool__(self) -> bool:
        return self.equivalent

    @property
    def vector(self) -> str:
        return "".join(str(b) for b in self.counterexample or ())


def verify_equivalence(
    netlist: Netlist,
    reference: Expr,
    table: CalibrationTable,
    enc: typing.Optional[LogicEncoding] = None,
    output: typing.Optional[str] = None,
    params: typing.Optional[DeviceParams] = None,
) -> EquivalenceResult:
    """Compare one netlist output with an expression for every input vector."""
    inputs = netlist.primary_inputs
    if len(inputs) > MAX_VARIABLES:
        raise TooManyInputsError(
            f"Netlist has {len(inputs)} inputs; at most {MAX_VARIABLES} can be checked."
        )
    missing = [v for v in reference.variables if v not in inputs]
    if missing:
        raise EquivalenceError(
            f"Expression uses {', '.join(missing)}, which the netlist does not have as inputs."
        )
    if not netlist.primary_outputs:
        raise EquivalenceError(f"Netlist '{netlist.name}' has no outputs.")
    if output is None:
        position = 0
    elif output in netlist.primary_outputs:
        position = netlist.primary_outputs.index(output)
    else:
        raise EquivalenceError(f"Netlist '{netlist.name}' has no output '{output}'.")

    checked = 0
    for bits in itertools.product((0, 1), repeat=len(inputs)):
        checked += 1
        got = steady_state(netlist, bits, table, enc, params)[position]
        if got != reference.evaluate(dict(zip(inputs, bits))):
            logger.info(
                "'%s' differs from %s at %s.",
                netlist.name,
                reference,
                "".join(str(b) for b in bits),
            )
            return EquivalenceResult(False, tuple(bits), checked)
    return EquivalenceResult(True, None, checked)
