"""Train small XGBoost models and dump them together with held-out predictions.

The generated files are checked in; this script only documents how they were
produced (xgboost 3.2.0, scikit-learn 1.7.2). Re-running it overwrites them.

    python3 fixtures/xgboost/make_fixture.py
"""

import csv
import json
import os

import numpy as np
import xgboost as xgb
from sklearn.datasets import load_breast_cancer, load_iris
from sklearn.model_selection import train_test_split

HERE = os.path.dirname(os.path.abspath(__file__))


def base_margins(bst, num_class, objective):
    cfg = json.loads(bst.save_config())
    raw = cfg["learner"]["learner_model_param"]["base_score"]
    raw = raw.strip("[]")
    scores = [float(s) for s in raw.split(",")]
    if objective == "binary:logistic":
        p = scores[0]
        return [float(np.log(p / (1.0 - p)))]
    if objective == "multi:softprob":
        if len(scores) == 1:
            scores = scores * num_class
        # softprob intercepts are stored in margin space
        return scores
    raise ValueError(objective)


def emit(name, X, y, objective, num_class, feature_names, rounds, depth):
    X = X.astype(np.float32).astype(np.float64)
    X_tr, X_te, y_tr, y_te = train_test_split(X, y, test_size=0.3, random_state=7)
    params = {"objective": objective, "max_depth": depth, "eta": 0.3, "seed": 7}
    if num_class > 2:
        params["num_class"] = num_class
    dtr = xgb.DMatrix(X_tr, label=y_tr, feature_names=feature_names)
    bst = xgb.train(params, dtr, num_boost_round=rounds)

    dump = [json.loads(t) for t in bst.get_dump(dump_format="json")]
    m = num_class if num_class > 2 else 1
    envelope = {
        "num_class": m,
        "base_margin": base_margins(bst, num_class, objective),
        "feature_names": feature_names,
        "trees": dump,
    }
    with open(os.path.join(HERE, f"{name}.model.json"), "w") as f:
        json.dump(envelope, f, indent=1)
    with open(os.path.join(HERE, f"{name}.dump.json"), "w") as f:
        json.dump(dump, f, indent=1)

    dte = xgb.DMatrix(X_te, feature_names=feature_names)
    margins = bst.predict(dte, output_margin=True)
    probs = bst.predict(dte)
    if m == 1:
        pred = (probs > 0.5).astype(int)
        margins = margins.reshape(-1, 1)
    else:
        pred = probs.argmax(axis=1)

    with open(os.path.join(HERE, f"{name}.instances.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(feature_names)
        for row in X_te:
            w.writerow([repr(float(v)) for v in row])
    with open(os.path.join(HERE, f"{name}.predictions.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["predicted_class"] + [f"margin_{k}" for k in range(m)])
        for p, mg in zip(pred, margins):
            w.writerow([int(p)] + [repr(float(v)) for v in mg])


def main():
    iris = load_iris()
    names = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
    emit("iris", iris.data, iris.target, "multi:softprob", 3, names, rounds=10, depth=3)

    bc = load_breast_cancer()
    names = [f"f{i}" for i in range(bc.data.shape[1])]
    emit("breast_cancer", bc.data, bc.target, "binary:logistic", 2, names, rounds=20, depth=4)


if __name__ == "__main__":
    main()
