from pathlib import Path

import pytest

from gsqc.circuit.library import bell_disentangle, deutsch_jozsa_example, identity_chain, random_circuit
from gsqc.circuit.parser import parse_circuit

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name: str):
    path = FIXTURES / name
    return parse_circuit(path.read_text(), name=path.stem)


def _corpus() -> dict:
    circuits = {
        "dj-constant": deutsch_jozsa_example((0, 0)),
        "dj-balanced": deutsch_jozsa_example((0, 1)),
        "dj-constant-one": deutsch_jozsa_example((1, 1)),
        "identity-5": identity_chain(5),
        "bell": load_fixture("bell.circ"),
        "ghz3": load_fixture("ghz3.circ"),
        "phases": load_fixture("phases.circ"),
        "bell-disentangle-4": bell_disentangle(4),
        "bell-disentangle-6-before": bell_disentangle(6, "before"),
        "bell-disentangle-5-after": bell_disentangle(5, "after"),
        "random-3q-no-cnot": random_circuit(3, 4, seed=7, cnot_probability=0.0),
        "random-1q": random_circuit(1, 8, seed=3),
    }
    return circuits


CORPUS = _corpus()
CNOT_CORPUS = {k: c for k, c in CORPUS.items() if c.cnots}


@pytest.fixture(params=sorted(CORPUS))
def corpus_circuit(request):
    return CORPUS[request.param]


@pytest.fixture(params=sorted(CNOT_CORPUS))
def cnot_circuit(request):
    return CNOT_CORPUS[request.param]
