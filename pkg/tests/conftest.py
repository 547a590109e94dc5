import pytest

from src.parser.scenario_parser import parse_program
from tests.helpers import scenario_text


@pytest.fixture
def allphotos_text():
    return scenario_text("allphotos")


@pytest.fixture
def hatemail_text():
    return scenario_text("hatemail")


@pytest.fixture
def small_program():
    return parse_program(
        """
        peer Alice
        peer Bob
        principal Charlie
        relation ext photos@Alice/1 owner Alice
        relation int shown@Alice/1
        fact photos@Alice("a.jpg")
        rule at Alice: shown@Alice($f) :- photos@Alice($f)
        grant read on photos@Alice to Bob
        """
    )
