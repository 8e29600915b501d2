"""
Cross-validated evaluation: accuracy, ROC-AUC, kappa, confusion matrix
======================================================================

Runs the full pipeline under stratified 5-fold cross-validation on the
survival table and reports the evaluation metrics fold by fold, plus the
pooled confusion matrix.
"""

import numpy as np

from mcarules.brl import BrlConfig, predict_proba_batch, train
from mcarules.dataset import stratified_kfold, subset
from mcarules.datasets import titanic_dataset
from mcarules.mca import build_indicator, fit
from mcarules.metrics import accuracy, cohen_kappa, confusion_matrix, roc_auc
from mcarules.miner import MinerConfig, mine

dataset = titanic_dataset()
miner_config = MinerConfig(r_max=2, s_min=0.3, mu_min=0.5, M=70)
brl_config = BrlConfig(
    lambda_=3.0, eta_card=1.0, alpha=1.0,
    n_chains=4, max_iters=50_000, check_interval=1_000,
    rhat_threshold=1.05, seed=0,
)

pooled = np.zeros((2, 2), dtype=np.int64)
accs, aucs = [], []
print("fold  accuracy  roc_auc")
for fold, (train_idx, test_idx) in enumerate(stratified_kfold(dataset, 5, seed=0)):
    fold_train = subset(dataset, train_idx)
    fold_test = subset(dataset, test_idx)

    # Mine on the training fold only; the test fold stays unseen.
    model = fit(build_indicator(fold_train), components=1)
    mined = mine(fold_train, model, miner_config)
    rule_list, _ = train(
        fold_train, tuple(sr.rule for sr in mined.rules), brl_config
    )

    probs = predict_proba_batch(rule_list, fold_test.X)
    y_pred = np.argmax(probs, axis=1)
    acc = accuracy(fold_test.Y, y_pred)
    auc = roc_auc(fold_test.Y, probs[:, 1])
    accs.append(acc)
    aucs.append(auc)
    pooled += confusion_matrix(fold_test.Y, y_pred, n_labels=2)
    print(f"{fold:>4}  {acc:.4f}    {auc:.4f}")

print(f"\nmean accuracy {np.mean(accs):.4f}, mean ROC-AUC {np.mean(aucs):.4f}")
print(f"pooled kappa {cohen_kappa(pooled):.4f}")
print("\npooled confusion matrix (rows = true, columns = predicted):")
names = dataset.label_names
width = max(len(n) for n in names) + 2
print(" " * width + "".join(f"{n:>{width}}" for n in names))
for i, name in enumerate(names):
    cells = "".join(f"{int(c):>{width}}" for c in pooled[i])
    print(f"{name:>{width}}{cells}")
