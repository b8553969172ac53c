import numpy as np
import pandas as pd
import pytest

from vbll_calib.data import SCHEMAS, DatasetSchema, TabularDataset, load_dataset

TOY_SCHEMA = DatasetSchema(
    name="toy",
    feature_columns=("f0", "f1"),
    label_column="label",
    label_rule={"0": 0, "1": 1},
)


@pytest.fixture(scope="session")
def wdbc_csv(tmp_path_factory):
    """Breast-cancer dataset written in the package's expected CSV layout.

    Sourced from scikit-learn's bundled copy of the UCI data; positive class
    is malignant.
    """
    sklearn = pytest.importorskip("sklearn.datasets")
    X, y = sklearn.load_breast_cancer(return_X_y=True)
    diagnosis = np.where(y == 0, "M", "B")  # sklearn: 0 = malignant
    cols = {"diagnosis": diagnosis}
    for j in range(X.shape[1]):
        cols[f"f{j}"] = X[:, j]
    path = tmp_path_factory.mktemp("data") / "breast_cancer.csv"
    pd.DataFrame(cols).to_csv(path, index=False)
    return path


@pytest.fixture(scope="session")
def wdbc(wdbc_csv):
    return load_dataset(wdbc_csv, SCHEMAS["breast_cancer"])


@pytest.fixture
def toy_dataset():
    """Small linearly separable two-feature problem."""
    rng = np.random.default_rng(0)
    n = 40
    y = np.repeat([0, 1], n // 2)
    X = rng.standard_normal((n, 2)) + 3.0 * y[:, None]
    return TabularDataset(X=X, y=y, row_ids=np.arange(n), schema=TOY_SCHEMA)
