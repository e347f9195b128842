import pytest

from fads import config
from fads.model import CoefficientCurve


def test_default_round_trip():
    cfg = config.default_config()
    assert config.parse(config.serialize(cfg)) == cfg


def test_round_trip_with_curves_and_sweep():
    text = config.DEFAULT_CONFIG_TEXT + (
        "model.sigma = [[0.0, 0.2], [0.5, 0.3]]\n"
        "experiment.rule = scaled:0.8\n"
        "experiment.estimand = upsilon_second_moment:1.0\n"
        "sweep.p = [0.0, 0.5, 1.0]\n"
        "sweep.T = 20\n"
    )
    cfg = config.parse(text)
    assert cfg.model.sigma == CoefficientCurve.piecewise([(0.0, 0.2), (0.5, 0.3)])
    assert cfg.sweep == {"p": [0.0, 0.5, 1.0], "T": [20.0]}
    assert config.parse(config.serialize(cfg)) == cfg
    assert cfg.experiment_spec().estimand.t == 1.0


def test_defaults_filled():
    cfg = config.parse("model.lambda = 1\nmodel.p = 0.5\nmodel.mu = 0.08\n"
                       "model.sigma = 0.2\nmodel.T = 1\n")
    assert cfg.model.gamma == 0.0 and cfg.model.x0 == 1.0
    assert cfg.experiment["investor"] == "informed"
    assert cfg.output == {"dir": "out", "formats": ["csv", "json"]}


@pytest.mark.parametrize("text, key", [
    (config.DEFAULT_CONFIG_TEXT.replace("model.lambda = 1.0\n", ""), "model.lambda"),
    (config.DEFAULT_CONFIG_TEXT + "model.kappa = 2\n", "model.kappa"),
    (config.DEFAULT_CONFIG_TEXT + "model.lambda = 0\n", "model.lambda"),
    (config.DEFAULT_CONFIG_TEXT + "model.sigma = [[0.0, 0.2], [0.5, 0.0]]\n", "model.sigma"),
    (config.DEFAULT_CONFIG_TEXT + "experiment.n_paths = 2.5\n", "experiment.n_paths"),
    (config.DEFAULT_CONFIG_TEXT + "experiment.rule = greedy\n", "experiment.rule"),
    (config.DEFAULT_CONFIG_TEXT + "output.formats = ['xml']\n", "output.formats"),
    (config.DEFAULT_CONFIG_TEXT + "sweep.mu = [0.1]\n", "sweep.mu"),
    (config.DEFAULT_CONFIG_TEXT + "plot.x = 1\n", "plot.x"),
    (config.DEFAULT_CONFIG_TEXT + "lambda = 1\n", "lambda"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(config.ConfigError) as info:
        config.parse(text)
    assert info.value.key == key
    assert key in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(config.ConfigError, match="cannot read"):
        config.load(tmp_path / "nope.cfg")


def test_comments_and_bare_strings():
    cfg = config.parse(config.DEFAULT_CONFIG_TEXT + "experiment.investor = uninformed  # S only\n")
    assert cfg.experiment["investor"] == "uninformed"
