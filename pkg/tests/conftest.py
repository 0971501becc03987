import pytest

from aspdbg.instrument import assemble_gamma
from aspdbg.parser import parse_program, parse_test_case

COLORING_TEXT = """\
node(X) :- edge(X,Y).
node(X) :- edge(Y,X).
col(X,blue) | col(X,red) | col(X,green) :- node(X).
:- col(X,C1), col(Y,C2), edge(X,Y), X != Y, C1 != C2.
edge(1,2).
edge(2,3).
"""

COLORING_TEST = """\
assertTrue(col(1,blue)).
assertTrue(col(2,red)).
assertTrue(col(3,blue)).
"""

PROPOSITIONAL_TEXT = """\
a :- c.
b :- not c.
c :- not b.
:- c, not b.
"""

PROPOSITIONAL_TEST = "assertTrue(a).\n"


@pytest.fixture(scope="session")
def coloring_program():
    return parse_program(COLORING_TEXT)


@pytest.fixture(scope="session")
def coloring_test():
    return parse_test_case(COLORING_TEST)


@pytest.fixture(scope="session")
def coloring_assembly(coloring_program, coloring_test):
    return assemble_gamma(coloring_program, coloring_test)


@pytest.fixture(scope="session")
def propositional_program():
    return parse_program(PROPOSITIONAL_TEXT)


@pytest.fixture(scope="session")
def propositional_test():
    return parse_test_case(PROPOSITIONAL_TEST)


@pytest.fixture(scope="session")
def propositional_assembly(propositional_program, propositional_test):
    return assemble_gamma(
        propositional_program, propositional_test, background=frozenset()
    )
