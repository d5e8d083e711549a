"""Reference values for the skew-normal noise model, computed with scipy.

Standardized skew-normal SN(0, 1, alpha). For each alpha prints the mode,
the standard deviation and the location Fisher information multiplied by
the variance (F * sigma^2), which is scale free.
"""
import numpy as np
from scipy import integrate, optimize, stats


def shape(alpha):
    dist = stats.skewnorm(alpha)
    mode = optimize.brentq(lambda u: -u + alpha * np.exp(stats.norm.logpdf(alpha * u) - stats.norm.logcdf(alpha * u)), -1.0, 1.0, xtol=1e-15)
    std = dist.std()

    def integrand(u):
        score = -u + alpha * np.exp(stats.norm.logpdf(alpha * u) - stats.norm.logcdf(alpha * u))
        return score * score * dist.pdf(u)

    fisher = 0.0
    for lo, hi in [(-np.inf, -10), (-10, 0), (0, 10), (10, np.inf)]:
        fisher += integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=500)[0]
    return mode, std, fisher * std**2


for alpha in [0.0, 2.0, 5.0, 7.0, 10.0, 20.0]:
    m, s, fs2 = shape(alpha)
    print(f"alpha={alpha:5.1f} mode={m:.15f} std={s:.15f} F*sigma^2={fs2:.15f}")

# Student-t and Laplace closed-form cross-check
for nu in (3.0, 4.0):
    s = 1.0 / np.sqrt(nu / (nu - 2.0))
    d = stats.t(nu, scale=s)
    f = lambda y: ((nu + 1) * y / (nu * s * s + y * y)) ** 2 * d.pdf(y)
    val = sum(integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=500)[0] for lo, hi in [(-np.inf, -40), (-40, 0), (0, 40), (40, np.inf)])
    print(f"student_t nu={nu} F*sigma^2 quad={val:.15f} closed={(nu+1)/((nu+3)*s*s):.15f}")
