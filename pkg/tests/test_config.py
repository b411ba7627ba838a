"""Configuration layering, coercion, and validation tests.

Environment is always passed in explicitly so tests never read or
mutate the real process environment.
"""

import json

import pytest

from trustlens import config
from trustlens.errors import TrustlensError
from trustlens.model import LearnerKind, ValidationError


def load(path=None, env=None, overrides=None):
    return config.load_config(path=path, env=env or {}, overrides=overrides)


def test_defaults():
    cfg = load()
    assert cfg.learner == "random_forest"
    assert cfg.strategy == "margin"
    assert cfg.batch_size == 100
    assert cfg.base_seed == 0
    assert cfg.percentile == 99.0
    assert cfg.denominator == "statuses"
    assert cfg.folds == 10
    assert cfg.annotators_required == 2
    assert cfg.learner_params == {}
    assert cfg.dataset_dir is None


def test_toml_file_layered_over_defaults(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text(
        'learner = "svm"\nbatch_size = 25\npercentile = 95.0\n'
        '[learner_params]\nkernel = "linear"\nC = 2.5\n')
    cfg = load(path=str(path))
    assert cfg.learner == "svm"
    assert cfg.batch_size == 25
    assert cfg.percentile == 95.0
    assert cfg.learner_params == {"kernel": "linear", "C": 2.5}
    # untouched keys keep their defaults
    assert cfg.strategy == "margin"


def test_json_file_supported(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"strategy": "entropy", "port": 9001}))
    cfg = load(path=str(path))
    assert cfg.strategy == "entropy"
    assert cfg.port == 9001


def test_env_beats_file(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text("batch_size = 25\n")
    cfg = load(path=str(path), env={"TRUSTLENS_BATCH_SIZE": "50"})
    assert cfg.batch_size == 50


def test_overrides_beat_env():
    cfg = load(env={"TRUSTLENS_STRATEGY": "entropy"},
               overrides={"strategy": "random"})
    assert cfg.strategy == "random"


def test_none_overrides_are_skipped():
    # unset CLI flags arrive as None and must not shadow lower layers
    cfg = load(env={"TRUSTLENS_BATCH_SIZE": "7"},
               overrides={"batch_size": None})
    assert cfg.batch_size == 7


def test_env_values_are_coerced():
    cfg = load(env={
        "TRUSTLENS_PORT": "8100",
        "TRUSTLENS_MIN_GAIN": "0.01",
        "TRUSTLENS_LEARNER_PARAMS": '{"n_trees": 7}',
        "TRUSTLENS_DATASET_DIR": "/tmp/ds",
    })
    assert cfg.port == 8100
    assert cfg.min_gain == 0.01
    assert cfg.learner_params == {"n_trees": 7}
    assert cfg.dataset_dir == "/tmp/ds"


def test_learner_params_must_be_a_table(tmp_path):
    with pytest.raises(ValidationError, match="table"):
        load(env={"TRUSTLENS_LEARNER_PARAMS": '[1, 2]'})


def test_boolean_is_not_an_integer(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text("batch_size = true\n")
    with pytest.raises(ValidationError, match="integer"):
        load(path=str(path))


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text("batchsize = 3\n")
    with pytest.raises(ValidationError, match="unknown config key"):
        load(path=str(path))
    with pytest.raises(ValidationError, match="unknown config key"):
        load(overrides={"learner_parms": {}})


def test_missing_file_is_an_error(tmp_path):
    with pytest.raises(TrustlensError, match="not found"):
        load(path=str(tmp_path / "nope.toml"))


def test_config_root_must_be_a_table(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2, 3]")
    with pytest.raises(ValidationError, match="table"):
        load(path=str(path))


@pytest.mark.parametrize("overrides,needle", [
    ({"strategy": "sorted"}, "strategy"),
    ({"learner": "boost"}, "learner"),
    ({"batch_size": 0}, "batch_size"),
    ({"percentile": 50.0}, "percentile"),
    ({"percentile": 100.5}, "percentile"),
    ({"dead_zone": 1.0}, "dead_zone"),
    ({"max_rounds": 0}, "max_rounds"),
    ({"folds": 1}, "folds"),
    ({"annotators_required": 0}, "annotators_required"),
    ({"feature_mask": "weird"}, "feature_mask"),
    ({"denominator": "likes"}, "denominator"),
])
def test_validation_rejects_bad_values(overrides, needle):
    with pytest.raises(ValidationError, match=needle):
        load(overrides=overrides)


def test_percentile_boundary_values():
    assert load(overrides={"percentile": 100}).percentile == 100.0
    with pytest.raises(ValidationError):
        load(overrides={"percentile": 50})


def test_learner_aliases():
    assert config.resolve_learner("rf") is LearnerKind.RANDOM_FOREST
    assert config.resolve_learner(" SVM ") is LearnerKind.SVM
    assert config.resolve_learner("mlp") is LearnerKind.MLP
    assert config.resolve_learner("random_forest") is LearnerKind.RANDOM_FOREST
    with pytest.raises(ValidationError, match="unknown learner"):
        config.resolve_learner("xgboost")


def test_learner_kind_method_and_to_dict():
    cfg = load(overrides={"learner": "rf"})
    assert cfg.learner_kind() is LearnerKind.RANDOM_FOREST
    d = cfg.to_dict()
    assert d["learner"] == "rf"
    assert d["batch_size"] == 100
