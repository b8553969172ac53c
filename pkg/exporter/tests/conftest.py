import numpy as np
import pandas as pd
import pytest


@pytest.fixture(scope="session")
def wdbc_csv(tmp_path_factory):
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
def heart_like_csv(tmp_path_factory):
    """Synthetic file in the Cleveland schema, including '?' markers."""
    rng = np.random.default_rng(0)
    n = 60
    cols = {
        c: rng.integers(0, 4, n)
        for c in ("sex", "cp", "fbs", "restecg", "exang", "slope")
    }
    cols.update(
        age=rng.integers(30, 80, n),
        trestbps=rng.integers(100, 180, n),
        chol=rng.integers(150, 350, n),
        thalach=rng.integers(90, 200, n),
        oldpeak=np.round(rng.uniform(0, 5, n), 1),
        ca=rng.integers(0, 4, n).astype(object),
        thal=rng.integers(3, 8, n).astype(object),
        num=rng.integers(0, 5, n),
    )
    df = pd.DataFrame(cols)
    df.loc[3, "ca"] = "?"
    df.loc[17, "thal"] = "?"
    path = tmp_path_factory.mktemp("data") / "heart_cleveland.csv"
    df.to_csv(path, index=False)
    return path
