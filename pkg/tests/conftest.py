import json
from pathlib import Path

import numpy as np
import pytest

from pairvqe.integrals import EriTable, IntegralSet, load_fcidump

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def fixture_path(molecule: str, label: str) -> Path:
    return FIXTURES / molecule / f"{molecule}_{label}.fcidump"


def fixture_metadata(molecule: str) -> dict:
    with open(FIXTURES / molecule / "metadata.json") as fh:
        return json.load(fh)


def fixture_point(molecule: str, label: str) -> dict:
    meta = fixture_metadata(molecule)
    for point in meta["points"]:
        if point["label"] == label:
            return point
    raise KeyError(f"no fixture point {molecule}/{label}")


@pytest.fixture(scope="session")
def h2_fixture() -> IntegralSet:
    return load_fcidump(fixture_path("h2", "0.735"))


@pytest.fixture(scope="session")
def h2_rhf_reference() -> float:
    return fixture_point("h2", "0.735")["e_rhf"]


def random_integral_set(norb: int, nelec: int, seed: int, e_core: float = 0.3,
                        scale: float = 0.2) -> IntegralSet:
    """Random symmetric integral tables; not physical, but valid."""
    rng = np.random.default_rng(seed)
    h = rng.normal(scale=1.0, size=(norb, norb))
    h = 0.5 * (h + h.T) - 1.5 * np.eye(norb)
    g = rng.normal(scale=scale, size=(norb,) * 4)
    g = (g + g.transpose(1, 0, 2, 3) + g.transpose(0, 1, 3, 2) + g.transpose(1, 0, 3, 2)
         + g.transpose(2, 3, 0, 1) + g.transpose(3, 2, 0, 1) + g.transpose(2, 3, 1, 0)
         + g.transpose(3, 2, 1, 0)) / 8.0
    return IntegralSet(norb=norb, nelec=nelec, ms2=0, e_core=e_core, h=h,
                       eri=EriTable.from_dense(g))


ONE_ORBITAL_TOY = """&FCI NORB=1,NELEC=2,MS2=0,
 ORBSYM=1,
 ISYM=1,
&END
0.625 1 1 1 1
-1.0 1 1 0 0
0.5 0 0 0 0
"""
