import pathlib

import numpy as np
import pytest

from hyperview import parse_table, normalize, matrix_from_normalized

DATA = pathlib.Path(__file__).resolve().parent.parent / "data" / "wbc" / "breast-cancer-wisconsin.data"


@pytest.fixture(scope="session")
def wbc():
    """Full 699-case dataset, id column first, class column last (2/4)."""
    text = DATA.read_text()
    return parse_table(text, class_column=-1, id_column=0)


@pytest.fixture(scope="session")
def wbc_norm(wbc):
    return normalize(wbc)


@pytest.fixture(scope="session")
def wbc_tm(wbc_norm):
    """Complete-case training matrix (683 cases), malignant breaks ties."""
    return matrix_from_normalized(wbc_norm, tie_class="4")


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in sys.modules.items()
                if name.endswith("test_acceptance") and m is not None), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n, text in results:
        terminalreporter.write_line(f"criterion {n}: PASS  {text}")
