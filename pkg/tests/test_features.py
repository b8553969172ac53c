import numpy as np
import pandas as pd
import pytest

from vbll_calib.data import Scaler, TabularDataset, fit_scaler, apply_scaler
from vbll_calib.features import (
    EmbeddingError,
    EmbeddingSet,
    load_embeddings,
    random_projection,
    raw_features,
    save_embeddings,
)

from conftest import TOY_SCHEMA


@pytest.fixture
def identity_scaler():
    return Scaler(mean=np.zeros(2), std=np.ones(2))


def _toy(n=6, d=2, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    return TabularDataset(
        X=rng.standard_normal((n, d)),
        y=y,
        row_ids=np.arange(n),
        schema=TOY_SCHEMA,
    )


class TestRawFeatures:
    def test_dim_equals_feature_count(self, wdbc):
        from vbll_calib.data import stratified_split

        split = stratified_split(wdbc, 0.7, 42)
        scaler = fit_scaler(wdbc, split.train)
        es = raw_features(wdbc, scaler)
        assert es.dim == 30
        assert es.source == "raw"

    def test_values_match_scaler(self, identity_scaler):
        ds = _toy()
        es = raw_features(ds, identity_scaler)
        np.testing.assert_array_equal(es.E, apply_scaler(identity_scaler, ds.X))
        np.testing.assert_array_equal(es.labels, ds.y)


class TestRandomProjection:
    def test_shape(self, identity_scaler):
        es = random_projection(_toy(), identity_scaler, target_dim=16, seed=1)
        assert es.E.shape == (6, 16)
        assert es.source == "random_projection"

    def test_deterministic(self, identity_scaler):
        ds = _toy()
        a = random_projection(ds, identity_scaler, 5, seed=9)
        b = random_projection(ds, identity_scaler, 5, seed=9)
        np.testing.assert_array_equal(a.E, b.E)

    def test_hand_product_2x2(self):
        ds = _toy(n=2, d=2, seed=3)
        scaler = Scaler(mean=np.zeros(2), std=np.ones(2))
        es = random_projection(ds, scaler, 2, seed=5)
        P = np.random.default_rng(5).standard_normal((2, 2)) / np.sqrt(2)
        expected0 = np.array(
            [
                ds.X[0, 0] * P[0, 0] + ds.X[0, 1] * P[1, 0],
                ds.X[0, 0] * P[0, 1] + ds.X[0, 1] * P[1, 1],
            ]
        )
        np.testing.assert_allclose(es.E[0], expected0, atol=1e-12)

    def test_linearity(self, identity_scaler):
        ds = _toy()
        scaled = TabularDataset(
            X=2.5 * ds.X, y=ds.y, row_ids=ds.row_ids, schema=ds.schema
        )
        a = random_projection(ds, identity_scaler, 4, seed=2)
        b = random_projection(scaled, identity_scaler, 4, seed=2)
        np.testing.assert_allclose(b.E, 2.5 * a.E, atol=1e-9)

    def test_bad_dim(self, identity_scaler):
        with pytest.raises(EmbeddingError):
            random_projection(_toy(), identity_scaler, 0, seed=0)


class TestEmbeddingFile:
    def _sample(self, n=3, h=4, with_labels=True):
        rng = np.random.default_rng(11)
        return EmbeddingSet(
            E=rng.standard_normal((n, h)).astype(np.float32).astype(np.float64),
            row_ids=np.arange(n),
            labels=(np.arange(n) % 2) if with_labels else None,
            source="external",
        )

    def test_round_trip_bits(self, tmp_path):
        es = self._sample()
        path = tmp_path / "e.vble"
        save_embeddings(es, path)
        loaded = load_embeddings(path)
        np.testing.assert_array_equal(loaded.E, es.E)
        np.testing.assert_array_equal(loaded.labels, es.labels)
        assert loaded.source == "external"

    def test_save_load_save_byte_identical(self, tmp_path):
        es = self._sample()
        p1, p2 = tmp_path / "a.vble", tmp_path / "b.vble"
        save_embeddings(es, p1)
        save_embeddings(load_embeddings(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_no_labels(self, tmp_path):
        es = self._sample(with_labels=False)
        path = tmp_path / "e.vble"
        save_embeddings(es, path)
        assert load_embeddings(path).labels is None

    def test_corrupt_magic(self, tmp_path):
        path = tmp_path / "e.vble"
        save_embeddings(self._sample(), path)
        raw = bytearray(path.read_bytes())
        raw[0:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(EmbeddingError, match="magic"):
            load_embeddings(path)

    def test_empty_set_rejected(self, tmp_path):
        import struct

        path = tmp_path / "e.vble"
        path.write_bytes(b"VBLE" + struct.pack("<IIIB", 1, 0, 4, 0))
        with pytest.raises(EmbeddingError, match="empty"):
            load_embeddings(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "e.vble"
        save_embeddings(self._sample(), path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 8])
        with pytest.raises(EmbeddingError, match="truncated"):
            load_embeddings(path)

    def test_trailer_ignored(self, tmp_path):
        es = self._sample()
        path = tmp_path / "e.vble"
        save_embeddings(es, path, trailer="split_seed=42\n")
        loaded = load_embeddings(path)
        np.testing.assert_array_equal(loaded.E, es.E)

    def test_csv_fallback(self, tmp_path):
        path = tmp_path / "e.csv"
        df = pd.DataFrame(
            {
                "row_id": [0, 1, 2],
                "label": [0, 1, 1],
                "e0": [0.5, 1.5, -2.0],
                "e1": [0.0, 3.0, 4.0],
            }
        )
        df.to_csv(path, index=False)
        loaded = load_embeddings(path)
        assert loaded.E.shape == (3, 2)
        np.testing.assert_array_equal(loaded.labels, [0, 1, 1])

    def test_non_finite_rejected(self):
        with pytest.raises(EmbeddingError, match="finite"):
            EmbeddingSet(
                E=np.array([[np.nan, 1.0]]),
                row_ids=np.array([0]),
                labels=None,
                source="external",
            )
