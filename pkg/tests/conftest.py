import random

import pytest

from wittlab import parse_ring


# rings with residue field != F_2 exercised by the chain and group suites
MATRIX_SPECS = [
    "GF(3)",
    "GF(4)",
    "GF(5)",
    "GF(7)",
    "GF(8)",
    "GF(9)",
    "Z/9",
    "Z/27",
    "GF(3)[x]/(x^2)",
    "GF(4)[y]/(y^2)",
]

# rings whose residue field is F_2 (chain lemma fails; BFS territory)
F2_RESIDUE_SPECS = ["GF(2)", "Z/4", "GF(2)[x]/(x^2)", "GF(2)[x]/(x^4)"]

COUNTEREXAMPLE_SPEC = "GF(2)[x]/(x^4)"


@pytest.fixture(scope="session")
def rings():
    return {spec: parse_ring(spec) for spec in MATRIX_SPECS + F2_RESIDUE_SPECS}


@pytest.fixture()
def rng():
    return random.Random(0)


def seeded(seed):
    return random.Random(seed)
