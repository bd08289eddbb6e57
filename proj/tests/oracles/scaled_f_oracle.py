# Independent oracle for the scaled F-score toy corpus (numpy/scipy).
import numpy as np
from scipy.stats import norm

def scaled_f(stats, tot_t=None, tot_n=None):
    nt = np.array([s[1] for s in stats], float)
    nn = np.array([s[2] for s in stats], float)
    tot_t = nt.sum() if tot_t is None else tot_t
    tot_n = nn.sum() if tot_n is None else tot_n
    def f_cat(nc, no, tot):
        prec = nc / (nc + no)
        freq = np.log1p(nc / tot)
        def z(x):
            sd = x.std()  # population std
            return np.zeros_like(x) if sd == 0 else (x - x.mean()) / sd
        a, b = norm.cdf(z(prec)), norm.cdf(z(freq))
        return np.where(a + b > 0, 2 * a * b / (a + b), 0.0)
    return f_cat(nt, nn, tot_t) - f_cat(nn, nt, tot_n)

toy = [("slur", 9, 1), ("covid", 1, 9), ("the", 5, 5), ("case", 2, 8)]
for (t, *_), v in zip(toy, scaled_f(toy)):
    print(f"{t} {v:.17g}")
print("sigmoid(-4)", f"{1/(1+np.exp(4)):.17g}")
