"""
Solver building blocks
======================

The SVM dual solver and the Jacobi PCA on small problems with known
answers.
"""
import numpy as np

from radiomarker.pca import fit_pca, pca_transform
from radiomarker.svm import decision_function, predict, train_svm

# %%
# Two points at (-1, 0) and (1, 0): the maximum-margin line is x = 0,
# with weight (1, 0) and margin 2.
X = np.array([[-1.0, 0.0], [1.0, 0.0]])
m = train_svm(X, [-1, 1], "linear", C=100)
print("weight", m.weights(), "bias", m.bias, "margin", 2 / np.linalg.norm(m.weights()))
print("decision at (2, 0):", decision_function(m, [[2.0, 0.0]])[0])

# %%
# XOR is not linearly separable but an RBF kernel fits it.
Xx = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
yx = np.array([-1, -1, 1, 1])
rbf = train_svm(Xx, yx, "rbf", C=100, gamma=1.0)
print("XOR predictions", predict(rbf, Xx), "KKT violation", f"{rbf.kkt_violation:.1e}")

# %%
# PCA on points scattered along a line: the first axis follows the
# line and the scores are uncorrelated.
rng = np.random.default_rng(0)
t = rng.normal(size=50)
P = np.c_[t, 2 * t, -t] + 0.05 * rng.normal(size=(50, 3))
pca = fit_pca(P, 3)
print("first axis", pca.components[:, 0].round(3))
print("eigenvalues", pca.eigenvalues.round(4))
S = pca_transform(pca, P)
print("score cross-products\n", (S.T @ S).round(4))
