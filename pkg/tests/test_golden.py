import glob
import os

import pytest

from rslv.core_ir import pretty_print
from rslv.pipeline import compile_source

from conftest import GOLDEN

CASES = sorted(os.path.basename(p)[:-4] for p in glob.glob(os.path.join(GOLDEN, "*.rsl")))

# every rule of the encoding and each holds context has a golden case
REQUIRED = {"predicate", "method", "produce", "consume", "call", "old", "resource_args", "acc", "coupling",
            "holds_eps_cur", "holds_eps_old", "holds_plus_cur", "holds_plus_old",
            "holds_minus_cur", "holds_minus_old"}


def render(name):
    with open(os.path.join(GOLDEN, name + ".rsl")) as fh:
        return pretty_print(compile_source(fh.read(), name + ".rsl"))


def test_required_cases_present():
    assert REQUIRED <= set(CASES)


@pytest.mark.parametrize("name", CASES)
def test_golden(name):
    with open(os.path.join(GOLDEN, name + ".ir"), newline="") as fh:
        expected = fh.read()
    assert render(name) == expected


def test_output_is_stable():
    assert render("call") == render("call")


def test_holds_goldens_are_distinct():
    outs = {render(n) for n in CASES if n.startswith("holds_")}
    assert len(outs) == 6
