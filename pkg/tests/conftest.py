"""Shared helpers for the test suite."""

import pathlib

import pytest

from refshare.analysis import Options, analyze_program
from refshare.components import DomainMode
from refshare.parser import parse_program
from refshare.typecheck import check_types

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

_prog_cache = {}


def load_fixture(name):
    """Parse and typecheck fixtures/<name>.pcore (cached)."""
    if name not in _prog_cache:
        src = (FIXTURES / f"{name}.pcore").read_text()
        prog = parse_program(src)
        check_types(prog)
        _prog_cache[name] = prog
    return _prog_cache[name]


def analyze_fixture(name, mode=DomainMode.OLD, precise_app=False):
    prog = load_fixture(name)
    return prog, analyze_program(prog, Options(mode=mode,
                                               precise_app=precise_app))


@pytest.fixture(scope="session")
def bst():
    return load_fixture("bst")


@pytest.fixture(scope="session")
def rtrees():
    return load_fixture("rtrees")
