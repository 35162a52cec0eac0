from dataclasses import replace

import pytest

from lonogo.compiler import compile_task
from lonogo.errors import ParseError
from lonogo.fock import PureState
from lonogo.reproduce import bell_task, cnot_task, noon_task
from lonogo.taskio import format_multi_task, format_task, load_task, parse_multi_task, parse_task

BELL_FILE = """\
# heralded Bell pair from three photons
name = bell3
modes = 5
input = 1 1 1 0 0
herald_pattern = 1
target = 1 : 1 0 1 0 ; 1 : 0 1 0 1
"""


def test_parse_bell_file():
    task = parse_task(BELL_FILE)
    assert task == bell_task()


@pytest.mark.parametrize("task", [bell_task(), noon_task(3), noon_task(5)], ids=lambda t: t.name)
def test_task_round_trip(task):
    assert parse_task(format_task(task)) == task


def test_multi_task_round_trip():
    mt = cnot_task(1)
    mt = replace(mt, suppress=(PureState.fock((0, 0, 0, 0, 1)),))
    assert parse_multi_task(format_multi_task(mt)) == mt


def test_herald_modes_are_moved_last():
    text = BELL_FILE.replace("input = 1 1 1 0 0", "input = 1 0 1 1 0").replace(
        "herald_pattern = 1", "herald_pattern = 1\nherald_modes = 2")
    task = parse_task(text)
    assert task.mode_order == (0, 2, 3, 4, 1)
    assert task.input == PureState.fock((1, 1, 1, 0, 0))
    # same physics as the last-mode convention
    assert compile_task(task).equations == compile_task(bell_task()).equations


def test_herald_modes_in_place_need_no_reordering():
    text = BELL_FILE.replace("herald_pattern = 1", "herald_pattern = 1\nherald_modes = 5")
    assert parse_task(text).mode_order is None


def test_superposed_input():
    text = BELL_FILE.replace("input = 1 1 1 0 0", "input = 1 : 1 1 1 0 0 ; 1 : 1 1 0 1 0")
    assert len(parse_task(text).input.amplitudes) == 2


def test_load_from_file(tmp_path):
    p = tmp_path / "bell.task"
    p.write_text(BELL_FILE, encoding="utf-8")
    assert load_task(p) == bell_task()


@pytest.mark.parametrize("text,line,column", [
    ("modes = 2\ninput = 1 x\ntarget = 1 : 1 0\n", 2, 9),
    ("modes = two\ninput = 1 0\ntarget = 1 : 1 0\n", 1, 9),
    ("modes = 2\ninput = 1 0\ntarget = 1 : 1 0\ncolour = red\n", 4, 1),
    ("modes = 2\nmodes = 3\n", 2, 1),
    ("modes = 2\njunk\n", 2, 1),
    ("modes = 2\ninput = 1 0\ntarget = 1 : 1 0\n[pair]\n", 4, None),
    ("modes = 3\ninput = 1 1 0\nherald_pattern = 1\nherald_modes = 4\ntarget = 1 : 1 0\n", 4, 16),
    ("modes = 2\ninput = 1 0\ntarget = q : 1 0\n", 3, 10),
])
def test_errors_carry_location(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_task(text)
    assert info.value.line == line
    if column is not None:
        assert info.value.column == column


def test_missing_key():
    with pytest.raises(ParseError, match="missing key 'target'"):
        parse_task("modes = 2\ninput = 1 0\n")


def test_multi_task_needs_a_pair():
    with pytest.raises(ParseError):
        parse_multi_task("modes = 3\nherald_pattern = 1\n[suppress]\ninput = 0 0 1\n")
    with pytest.raises(ParseError):
        parse_multi_task("modes = 3\n[other]\n")
