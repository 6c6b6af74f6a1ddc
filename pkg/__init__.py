# Hadamard Sparse Regression Toolkit
"""
Implicit regularization by gradient descent on beta = g * l, with early
stopping, Lasso baselines and a replication harness
"""
