"""Independent oracle computations for the frozen test constants.

Every nontrivial expected value asserted in tests/ was produced by this
script, which deliberately shares no code with the package: derivatives
are mpmath central differences at 50 digits, integrals are mpmath.quad,
roots come from mpmath.findroot.  Run it to regenerate the table:

    python3 tools/oracles.py
"""

import mpmath as mp

mp.mp.dps = 50


def show(name, value):
    print(f"{name:<46} = {mp.nstr(mp.mpf(value), 22)}")


# gamma reference points
show("sqrt(pi)", mp.sqrt(mp.pi))
show("2/sqrt(pi)", 2 / mp.sqrt(mp.pi))
show("gamma(1.5)", mp.gamma(mp.mpf(3) / 2))
show("gamma(0.5)", mp.gamma(mp.mpf(1) / 2))

# gfd/khalil multiplier ratio for alpha=0.5, beta=1.5:
# both multipliers are proportional to t^(1-alpha); the gfd one carries
# gamma(beta)/gamma(beta-alpha+1).
show("gamma(1.5)/gamma(2.0)", mp.gamma(mp.mpf(3) / 2) / mp.gamma(2))

# deformation multipliers at h=0, via central differences in h
def mult(p, t):
    return mp.diff(lambda h: p(mp.mpf(t), h), 0)

khalil = lambda a: (lambda t, h: t + h * t ** (1 - a))
katugampola = lambda a: (lambda t, h: t * mp.e ** (h * t ** (-a)))
show("khalil(0.5) mult at t=4", mult(khalil(mp.mpf("0.5")), 4))
show("katugampola(0.5) mult at t=4", mult(katugampola(mp.mpf("0.5")), 4))

# derivative of t^2 at t=4 under khalil(0.5): mult * f'
show("khalil(0.5) D[t^2](4)", mult(khalil(mp.mpf("0.5")), 4) * 8)

# cosine family at t=0.7, f=t^2: mult = (cos t)^(1-alpha), D = mult * 2t
cosm = mp.cos(mp.mpf("0.7")) ** mp.mpf("0.5")
show("cosine(0.5) D[t^2](0.7)", cosm * mp.mpf("1.4"))

# weighted integrals over [0,4] for khalil(0.5): weight 1/mult = t^(a-1)
show("int_0^4 t^(-1/2) dt", mp.quad(lambda t: t ** mp.mpf("-0.5"), [0, 4]))
show("int_0^4 t*t^(-1/2) dt", mp.quad(lambda t: t ** mp.mpf("0.5"), [0, 4]))
# generic closed forms T^a/a and T^(a+1)/(a+1) for T=4, a=0.5
show("4^0.5/0.5", 4 ** mp.mpf("0.5") / mp.mpf("0.5"))
show("4^1.5/1.5", 4 ** mp.mpf("1.5") / mp.mpf("1.5"))

# nontrivial weighted integral frozen into tests: sin under khalil(0.5)
show("int_0^4 sin(t) t^(-1/2) dt",
     mp.quad(lambda t: mp.sin(t) * t ** mp.mpf("-0.5"), [0, 4]))

# weight-norm of khalil(0.5) on [0, 1/16]
show("int_0^(1/16) t^(-1/2) dt",
     mp.quad(lambda t: t ** mp.mpf("-0.5"), [0, mp.mpf(1) / 16]))

# mean-value points under khalil(0.5); residual r(c) = D_p f(c) - K mult(c)
# f=t^2 on [1,2]: K = (4-1)/(2-1) = 3, r = sqrt(c)(2c-3) -> c = 3/2 exactly
show("mvt c for t^2 on [1,2]", mp.mpf(3) / 2)
# two-function form f=t, g=sqrt on [1,2]:
# D_p f / D_p g = 2 sqrt(c) = (2-1)/(sqrt2-1) -> c = 1/(4 (sqrt2-1)^2)
show("cauchy c for (t, sqrt t) on [1,2]", 1 / (4 * (mp.sqrt(2) - 1) ** 2))
show("cauchy k = D_p g at c", mp.mpf(1) / 2)
# rolle for sin(pi t) on [1,2]: sqrt(c) pi cos(pi c) = 0 -> c = 3/2
show("rolle c for sin(pi t) on [1,2]", mp.mpf(3) / 2)

# riccati with q=0: in tau(t) = int_0^t 1/mult = 2 sqrt(t) (khalil 0.5),
# u(t) = 1/(1/u0 + tau).  Contraction data for u0=1, T=0.05:
tau = lambda t: 2 * mp.sqrt(t)
show("tau(0.05) = l1 norm", tau(mp.mpf("0.05")))
show("k = 2*b*l1 at b=1", 2 * tau(mp.mpf("0.05")))
show("u(0.04) = 1/(1+2*0.2)", 1 / (1 + tau(mp.mpf("0.04"))))
show("u(0.05)", 1 / (1 + tau(mp.mpf("0.05"))))
# tanh case: khalil alpha=1 is the classic derivative; q=1, u0=0 -> u=tanh
show("tanh(0.4)", mp.tanh(mp.mpf("0.4")))
show("tanh(0.2)", mp.tanh(mp.mpf("0.2")))

# lacunary cosine series, a=41, b=0.9, alpha=2
a, b, alpha = 41, mp.mpf("0.9"), 2
show("sum b^n cos(0) = 1/(1-b)", 1 / (1 - b))
show("f(1) = -1/(1-b)  (a odd)", -1 / (1 - b))
# term count: smallest N with b^N/(1-b) <= tol
tol = mp.mpf("1e-8")
show("term count ceil(log(tol(1-b))/log b)", mp.ceil(mp.log(tol * (1 - b)) / mp.log(b)))
# growth margin and the lower-bound coefficient
show("a^(1/alpha)*b", a ** (mp.mpf(1) / alpha) * b)
show("1 + 3*pi/2", 1 + 3 * mp.pi / 2)
C = (mp.mpf(2) / 3) ** (mp.mpf(1) / alpha) \
    - (mp.pi / (a * b - 1)) * (mp.mpf(3) / 2) ** ((alpha - 1) / mp.mpf(alpha))
show("bound coefficient C(41, 0.9, 2)", C)

# first ladder step at x=0: the offset is h_1^alpha = 1/41 (so that
# a^1 (x + h_1^alpha) lands on an integer), the denominator is h_1
h1 = (mp.mpf(1) / 41) ** (mp.mpf(1) / alpha)
fx = lambda x: mp.nsum(lambda n: b ** n * mp.cos(a ** n * mp.pi * x), [0, mp.inf])
show("quotient |f(h_1^2)-f(0)|/h_1", abs(fx(h1 ** alpha) - fx(0)) / h1)
show("lower bound C*a^(1/2)*b", C * a ** (mp.mpf(1) / alpha) * b)
# and the second step, offset 1/41^2, to pin the ladder growth ratio
h2 = (mp.mpf(1) / 41 ** 2) ** (mp.mpf(1) / alpha)
show("quotient |f(h_2^2)-f(0)|/h_2", abs(fx(h2 ** alpha) - fx(0)) / h2)
