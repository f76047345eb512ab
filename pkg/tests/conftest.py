import numpy as np
import pytest

from qconsensus import scenario as scen


def example_a_doc(**overrides) -> dict:
    """Four agents on a star graph with the unstable 2-state plant."""
    doc = {
        "name": "example-a",
        "mode": "general",
        "system": {
            "A": [[1.1162, 0.1109], [0.2218, 1.1162]],
            "B": [[0.1052, 0.0053], [0.0, 0.1052]],
            "C": [[1.0, 2.0]],
            "K": [[4.2, 0.0], [0.0, 4.2]],
            "F": [[0.2757], [0.2134]],
            "delta": 0.1,
            "c_x0": 1.0,
        },
        "graph": {"preset": "star", "n": 4},
        "zoom": {"gamma1": 0.85, "gamma2": 1.4, "theta0": 1.0},
        "quantizer": {"levels": 4435, "step": 1.0},
        "dos": {"generator": {"seed": 56, "target_duty": 0.19, "mean_period": 0.6667}},
        "horizon": 10.0,
        "initial_states": {"seed": 0},
        "strict_saturation": False,
    }
    doc.update(overrides)
    return doc


def scalar_doc(**overrides) -> dict:
    """Four scalar agents, star graph, zoom-out factor derived from the rule."""
    doc = {
        "name": "example-scalar",
        "mode": "scalar_quantized",
        "system": {
            "A": [[1.1]], "B": [[1.0]], "C": [[1.0]], "K": [[0.44]],
            "delta": 0.1, "c_x0": 1.0,
        },
        "graph": {"preset": "star", "n": 4},
        "zoom": {"gamma1": 0.67},
        "quantizer": {"levels": 200, "step": 1.0},
        "dos": {"generator": {"seed": 0, "target_duty": 0.78, "mean_period": 0.9}},
        "horizon": 25.0,
        "initial_states": {"seed": 0},
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def example_a_config() -> scen.ScenarioConfig:
    return scen.from_dict(example_a_doc())


@pytest.fixture
def scalar_config() -> scen.ScenarioConfig:
    return scen.from_dict(scalar_doc())


@pytest.fixture
def published_matrices():
    return {
        "A": np.array([[1.1162, 0.1109], [0.2218, 1.1162]]),
        "B": np.array([[0.1052, 0.0053], [0.0, 0.1052]]),
        "C": np.array([[1.0, 2.0]]),
        "K": np.diag([4.2, 4.2]),
        "F": np.array([[0.2757], [0.2134]]),
    }
