"""Solve an SDPA sparse file with cvxpy and print the optimal value.

Reads the standard form: minimise c.x subject to sum_i x_i F_i - F_0 PSD,
with negative block sizes meaning diagonal blocks. Exits 77 when cvxpy is
not importable.
"""
import sys

try:
    import cvxpy as cp
    import numpy as np
except ImportError:
    sys.exit(77)


def tokens(path):
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line[0] in '"*':
                continue
            for tok in line.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ").split():
                yield tok


def read_sdpa(path):
    it = tokens(path)
    m = int(next(it))
    nb = int(next(it))
    sizes = [int(next(it)) for _ in range(nb)]
    c = np.array([float(next(it)) for _ in range(m)])
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    rest = list(it)
    for k in range(0, len(rest), 5):
        matno, blk, i, j = (int(x) for x in rest[k:k + 4])
        v = float(rest[k + 4])
        a = mats[matno][blk - 1]
        a[i - 1, j - 1] = v
        a[j - 1, i - 1] = v
    return m, sizes, c, mats


def main():
    m, sizes, c, mats = read_sdpa(sys.argv[1])
    x = cp.Variable(m)
    cons = []
    for b, s in enumerate(sizes):
        expr = sum(x[i] * mats[i + 1][b] for i in range(m) if np.any(mats[i + 1][b])) - mats[0][b]
        if s < 0:
            cons.append(cp.diag(expr) >= 0)
        else:
            cons.append((expr + expr.T) / 2 >> 0)
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=cp.CLARABEL if "CLARABEL" in cp.installed_solvers() else cp.SCS)
    print(float(prob.value))


main()
