# Re-solves a problem dump (--dump-sdp) with cvxpy and prints status and optimum.
import sys, numpy as np, cvxpy as cp
tok = open(sys.argv[1]).read().split()
pos = 0
def nxt():
    global pos; pos += 1; return tok[pos-1]
assert nxt() == 'aoismpc-sdp'; nxt()
assert nxt() == 'variables'; n = int(nxt())
for _ in range(n): nxt(); nxt(); nxt()
assert nxt() == 'objective'; c = np.array([float(nxt()) for _ in range(n)])
z = cp.Variable(n); cons = []
def lower(d):
    m = np.zeros((d, d))
    for i in range(d):
        for j in range(i+1):
            m[i, j] = m[j, i] = float(nxt())
    return m
while True:
    t = nxt()
    if t == 'end': break
    if t == 'psd':
        name = nxt(); d = int(nxt()); nt = int(nxt()); assert nxt() == 'F0'
        F = lower(d)
        expr = F
        for _ in range(nt):
            assert nxt() == 'F'; v = int(nxt()); expr = expr + z[v] * lower(d)
        cons.append((expr + expr.T) / 2 >> 0)
    elif t == 'soc':
        name = nxt(); d = int(nxt()); nt = int(nxt()); ny = int(nxt())
        assert nxt() == 't0'; tt = float(nxt())
        assert nxt() == 'y0'; y = np.array([float(nxt()) for _ in range(d)])
        texpr = tt; yexpr = y
        for _ in range(nt):
            assert nxt() == 't'; v = int(nxt()); texpr = texpr + float(nxt()) * z[v]
        for _ in range(ny):
            assert nxt() == 'y'; v = int(nxt()); a = np.array([float(nxt()) for _ in range(d)]); yexpr = yexpr + a * z[v]
        cons.append(cp.SOC(texpr, yexpr))
    else:
        raise SystemExit('unknown ' + t)
p = cp.Problem(cp.Minimize(c @ z), cons)
p.solve(solver=cp.CLARABEL if 'CLARABEL' in cp.installed_solvers() else cp.SCS)
print(p.status, p.value, cp.installed_solvers())
