"""Reading and writing task files.

A task file is UTF-8 text of ``key = value`` lines. ``#`` starts a comment.

Single task::

    name = bell3
    modes = 5
    input = 1 1 1 0 0
    herald_pattern = 1
    target = 1 : 1 0 1 0 ; 1 : 0 1 0 1
    arithmetic = exact

``input`` is either an occupation (integers only) or a state in the
``amplitude : occupation ; ...`` grammar. ``herald_modes`` optionally lists
the 1-based heralded modes; they are moved to the end and the permutation
is kept in ``mode_order``. Without it the last ``len(herald_pattern)`` modes
are heralded.

Multi-task files put shared keys first and then ``[pair]`` blocks (``input``
and ``target``) and ``[suppress]`` blocks (``input`` only).
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError, ValidationError
from .fock import MultiTaskSpec, PureState, TaskSpec, parse_state, serialize_state

TASK_KEYS = {"name", "modes", "input", "herald_modes", "herald_pattern", "target", "arithmetic"}
MULTI_KEYS = {"name", "modes", "herald_modes", "herald_pattern", "arithmetic"}
BLOCK_KEYS = {"pair": {"input", "target"}, "suppress": {"input"}}


class _Field:
    __slots__ = ("value", "line", "column")

    def __init__(self, value: str, line: int, column: int):
        self.value = value
        self.line = line
        self.column = column

    def fail(self, message: str) -> ParseError:
        return ParseError(message, line=self.line, column=self.column)


def _scan(text: str) -> list[tuple[str, dict[str, _Field], int]]:
    """Split into ``(block kind, fields, line)`` with the header block first."""
    blocks: list[tuple[str, dict[str, _Field], int]] = [("header", {}, 1)]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError("unterminated block header", line=lineno, column=len(line) + 1)
            kind = stripped[1:-1].strip()
            if kind not in BLOCK_KEYS:
                raise ParseError(f"unknown block [{kind}]", line=lineno, column=line.index("[") + 2)
            blocks.append((kind, {}, lineno))
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError("expected 'key = value'", line=lineno, column=len(line) - len(line.lstrip()) + 1)
        key = key.strip()
        kind, fields, _ = blocks[-1]
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", line=lineno, column=raw.index(key) + 1)
        col = len(line) - len(value.lstrip()) + 1
        fields[key] = _Field(value.strip(), lineno, col)
    return blocks


def _int(f: _Field, what: str) -> int:
    try:
        return int(f.value)
    except ValueError:
        raise f.fail(f"{what} must be an integer, got {f.value!r}") from None


def _ints(f: _Field, what: str) -> tuple[int, ...]:
    if not f.value:
        return ()
    try:
        return tuple(int(x) for x in f.value.split())
    except ValueError:
        raise f.fail(f"{what} must be space-separated integers") from None


def _state(f: _Field, modes: int | None = None) -> PureState:
    if ":" not in f.value:
        occ = _ints(f, "occupation")
        try:
            return PureState.fock(occ)
        except ValidationError as e:
            raise f.fail(str(e)) from None
    try:
        return parse_state(f.value, modes)
    except (ParseError, ValidationError) as e:
        raise f.fail(str(e)) from None


def _check_keys(fields: dict[str, _Field], allowed: set[str], where: str) -> None:
    for key, f in fields.items():
        if key not in allowed:
            raise ParseError(f"unknown key {key!r} in {where}", line=f.line, column=1)


def _require(fields: dict[str, _Field], key: str, where: str, line: int) -> _Field:
    if key not in fields:
        raise ParseError(f"missing key {key!r} in {where}", line=line)
    return fields[key]


def _herald_order(fields: dict[str, _Field], modes: int, M: int) -> tuple[int, ...] | None:
    """Zero-based permutation putting the heralded modes last, or ``None``."""
    if "herald_modes" not in fields:
        return None
    f = fields["herald_modes"]
    hm = _ints(f, "herald_modes")
    if len(hm) != M:
        raise f.fail(f"{len(hm)} heralded modes but the pattern has {M} entries")
    if len(set(hm)) != len(hm) or any(not 1 <= h <= modes for h in hm):
        raise f.fail(f"herald_modes must be distinct indices in 1..{modes}")
    herald = [h - 1 for h in hm]
    order = tuple([k for k in range(modes) if k not in herald] + herald)
    return None if order == tuple(range(modes)) else order


def _permute(state: PureState, order: tuple[int, ...] | None) -> PureState:
    if order is None:
        return state
    amps = {tuple(occ[k] for k in order): a for occ, a in state.amplitudes.items()}
    return PureState(state.modes, amps, state.basis)


def parse_task(text: str) -> TaskSpec:
    blocks = _scan(text)
    if len(blocks) > 1:
        raise ParseError("block headers belong in multi-task files", line=blocks[1][2])
    fields = blocks[0][1]
    _check_keys(fields, TASK_KEYS, "task")
    modes = _int(_require(fields, "modes", "task", 1), "modes")
    pattern = _ints(fields["herald_pattern"], "herald_pattern") if "herald_pattern" in fields else ()
    order = _herald_order(fields, modes, len(pattern))
    inp = _permute(_state(_require(fields, "input", "task", 1), modes), order)
    target = _state(_require(fields, "target", "task", 1))
    arith = fields["arithmetic"].value if "arithmetic" in fields else "exact"
    name = fields["name"].value if "name" in fields else ""
    return TaskSpec(modes, inp, pattern, target, arith, order, name)


def parse_multi_task(text: str) -> MultiTaskSpec:
    blocks = _scan(text)
    _, head, _ = blocks[0]
    _check_keys(head, MULTI_KEYS, "multi-task header")
    modes = _int(_require(head, "modes", "multi-task header", 1), "modes")
    pattern = _ints(head["herald_pattern"], "herald_pattern") if "herald_pattern" in head else ()
    order = _herald_order(head, modes, len(pattern))
    pairs, suppress = [], []
    for kind, fields, line in blocks[1:]:
        _check_keys(fields, BLOCK_KEYS[kind], f"[{kind}] block")
        inp = _permute(_state(_require(fields, "input", f"[{kind}] block", line), modes), order)
        if kind == "pair":
            pairs.append((inp, _state(_require(fields, "target", "[pair] block", line))))
        else:
            suppress.append(inp)
    if not pairs:
        raise ParseError("a multi-task file needs at least one [pair] block")
    arith = head["arithmetic"].value if "arithmetic" in head else "exact"
    name = head["name"].value if "name" in head else ""
    return MultiTaskSpec(modes, pattern, tuple(pairs), tuple(suppress), arith, order, name)


def _input_text(state: PureState) -> str:
    occ = next(iter(state.amplitudes))
    if len(state.amplitudes) == 1 and state.basis == "fock" and state.amplitudes[occ] == 1:
        return " ".join(map(str, occ))
    return serialize_state(state)


def format_task(task: TaskSpec) -> str:
    """Task file text; heralded modes are written in last-M convention."""
    lines = []
    if task.name:
        lines.append(f"name = {task.name}")
    lines += [
        f"modes = {task.modes}",
        f"input = {_input_text(task.input)}",
        f"herald_pattern = {' '.join(map(str, task.herald_pattern))}",
        f"target = {serialize_state(task.target)}",
        f"arithmetic = {task.arithmetic}",
    ]
    return "\n".join(lines) + "\n"


def format_multi_task(mt: MultiTaskSpec) -> str:
    lines = []
    if mt.name:
        lines.append(f"name = {mt.name}")
    lines += [
        f"modes = {mt.modes}",
        f"herald_pattern = {' '.join(map(str, mt.herald_pattern))}",
        f"arithmetic = {mt.arithmetic}",
    ]
    for inp, tgt in mt.pairs:
        lines += ["", "[pair]", f"input = {_input_text(inp)}", f"target = {serialize_state(tgt)}"]
    for inp in mt.suppress:
        lines += ["", "[suppress]", f"input = {_input_text(inp)}"]
    return "\n".join(lines) + "\n"


def load_task(path) -> TaskSpec:
    return parse_task(Path(path).read_text(encoding="utf-8"))


def load_multi_task(path) -> MultiTaskSpec:
    return parse_multi_task(Path(path).read_text(encoding="utf-8"))
