import numpy as np
import pytest

from inbi.model import SLOTS_PER_DAY, BuildingScenario


def tiny_scenario(seed: int = 3, n_ordinary: int = 1, n_special: int = 1) -> BuildingScenario:
    """Small random roster with generation on the special buildings only."""
    rng = np.random.default_rng(seed)
    n = n_ordinary + n_special
    load = rng.uniform(0.1, 0.4, size=(n, SLOTS_PER_DAY))
    gen = np.zeros((n, SLOTS_PER_DAY))
    pv, wind = gen.copy(), gen.copy()
    pv[n_ordinary:] = rng.uniform(0.0, 0.3, size=(n_special, SLOTS_PER_DAY))
    wind[n_ordinary:] = rng.uniform(0.05, 0.3, size=(n_special, SLOTS_PER_DAY))
    return BuildingScenario(
        n_ordinary=n_ordinary, n_special=n_special,
        load_critical=0.5 * load, load_sched=0.3 * load, load_switch=0.2 * load,
        pv=pv, wind=wind, temperature=np.full(SLOTS_PER_DAY, 28.0),
    )


@pytest.fixture
def scenario():
    return tiny_scenario()


def small_config(seed: int = 0, **overrides):
    """A six-building roster with a coarse solver so building runs take seconds."""
    from inbi.config import AWSConfig, BuildingRunConfig, Config, SolverConfig, SynthesisSpec

    solver = SolverConfig(mesh_tol=1e-2, max_evals=10000, n_starts=1, n_random_dirs=4, chunk_size=128)
    base = dict(
        seed=seed,
        synthesis=SynthesisSpec(n_buildings=6, n_special=3),
        aws=AWSConfig(rounds=1),
        building=BuildingRunConfig(divisions=2, aws_weight_step=0.5, solver=solver),
    )
    base.update(overrides)
    return Config(**base)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance")
    for name, (ok, detail) in sorted(results.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
