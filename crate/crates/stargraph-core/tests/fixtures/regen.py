from plan_b import f_tilde_b, density_b
from mpmath import mpf
import sys

rows = {}
for (eta, alpha) in [(mpf("0.5"), 2), (mpf(1), 2), (mpf(2), 2),
                     (mpf("0.5"), 3), (mpf(1), 3), (mpf(2), 3),
                     (mpf("0.05"), 3), (mpf(19), 3), (mpf(99), 2)]:
    a_cut = max(10000, int(120 * 4 * eta))
    v = f_tilde_b(eta, alpha, a_cut=a_cut)
    print(f"ftilde,{float(eta)!r},{alpha},0,{float(v)!r},0.0"); sys.stdout.flush()
for (sig, eta, alpha) in [(mpf("-0.25"), mpf(1), 2), (mpf(-1), mpf(1), 2),
                          (mpf(-4), mpf(1), 2), (mpf(-1), mpf(2), 3)]:
    v = density_b(sig, eta, alpha)
    print(f"density,{float(eta)!r},{alpha},{float(sig)!r},{float(v)!r},0.0"); sys.stdout.flush()
