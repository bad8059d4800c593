"""Table cache: canonical filenames, bit-exact round trips, corruption checks."""

import json

import numpy as np
import pytest

from tailcens import FkConfig, ValidationError
from tailcens.fixed_k import cache


@pytest.fixture()
def cfg():
    return FkConfig(
        xi_grid=np.array([0.2, 0.5, 0.8]),
        level=0.95,
        cv_draws=500,
        lambda_draws=100,
        seed=7,
    )


def test_payload_roundtrip_bit_exact(cfg, tmp_path):
    payload = cache.new_payload("cv", 10, 2, None, cfg, 500)
    payload["values"] = [1.25, 1.0000000000000002, 3.7e-12]
    path = cache.save_table(tmp_path, payload)
    back = cache.load_table(path)
    assert back == payload
    # identical content writes an identical file
    text_first = path.read_text()
    cache.save_table(tmp_path, payload)
    assert path.read_text() == text_first


def test_lambda_filename_encodes_target(cfg, tmp_path):
    payload = cache.new_payload("lambda", 8, 1, 2.5, cfg, 100)
    payload["masses"] = [0.1, 0.2, 0.3]
    path = cache.save_table(tmp_path, payload)
    assert path.name.startswith("lambda_k8_m1_h2.5_l0.95_g")
    assert path.name.endswith("_s7_d100.json")


def test_lookup_hits_only_exact_parameters(cfg, tmp_path):
    payload = cache.new_payload("cv", 10, 2, None, cfg, 500)
    payload["values"] = [1.0, 2.0, 3.0]
    cache.save_table(tmp_path, payload)

    hit = cache.lookup_table(
        tmp_path, "cv", 10, 2, None, cfg.level, cfg.xi_grid, cfg.w, cfg.seed, 500
    )
    assert hit is not None and hit["values"] == [1.0, 2.0, 3.0]

    assert (
        cache.lookup_table(
            tmp_path, "cv", 10, 2, None, cfg.level, cfg.xi_grid, cfg.w, cfg.seed, 501
        )
        is None
    )
    other_grid = np.array([0.25, 0.5, 0.8])
    w = np.full(3, 1 / 3)
    assert (
        cache.lookup_table(
            tmp_path, "cv", 10, 2, None, cfg.level, other_grid, w, cfg.seed, 500
        )
        is None
    )
    assert cache.lookup_table(None, "cv", 10, 2, None, 0.95, cfg.xi_grid, cfg.w, 7, 500) is None


def test_save_rejects_incomplete_payload(tmp_path):
    with pytest.raises(ValidationError) as exc:
        cache.save_table(tmp_path, {"format": cache.TABLE_FORMAT, "kind": "cv"})
    assert "missing fields" in str(exc.value)


def test_load_rejects_foreign_or_stale_files(tmp_path):
    alien = tmp_path / "alien.json"
    alien.write_text(json.dumps({"format": "something-else", "version": 1}))
    with pytest.raises(ValidationError):
        cache.load_table(alien)

    stale = tmp_path / "stale.json"
    stale.write_text(
        json.dumps({"format": cache.TABLE_FORMAT, "version": cache.TABLE_VERSION + 1})
    )
    with pytest.raises(ValidationError):
        cache.load_table(stale)


def test_nan_payload_refused(cfg, tmp_path):
    payload = cache.new_payload("cv", 10, 2, None, cfg, 500)
    payload["values"] = [float("nan")]
    with pytest.raises(ValueError):
        cache.save_table(tmp_path, payload)


def test_cache_dir_from_env(monkeypatch, tmp_path):
    monkeypatch.delenv(cache.CACHE_ENV_VAR, raising=False)
    assert cache.cache_dir_from_env() is None
    monkeypatch.setenv(cache.CACHE_ENV_VAR, str(tmp_path))
    assert cache.cache_dir_from_env() == tmp_path
