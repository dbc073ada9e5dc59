import csv
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from ruleevo import _pykernel, kernel  # noqa: E402
from ruleevo.policy import parse_policy  # noqa: E402

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "fixtures"


def reference_policy_text(env: str) -> str:
    return (resources.files("ruleevo") / "policies" / f"{env}.txt").read_text()


def reference_policy(env: str):
    return parse_policy(reference_policy_text(env))


def load_fixture(path: Path):
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    dim = len([k for k in rows[0] if k[0] == "s" and k[1:].isdigit()])
    obs = np.array([[float(r[f"s{i}"]) for i in range(dim)] for r in rows])
    actions = np.array([int(r["action"]) for r in rows])
    rewards = np.array([float(r["reward"]) for r in rows])
    done = np.array([r["done"] == "1" for r in rows])
    return actions, obs, rewards, done


def _kernel_modules():
    mods = [_pykernel]
    if kernel.compiled_available():
        from ruleevo import _ckernel
        mods.append(_ckernel)
    return mods


@pytest.fixture(params=_kernel_modules(), ids=lambda m: m.NAME)
def backend(request):
    return request.param


# acceptance outcomes, reported in the terminal summary
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
