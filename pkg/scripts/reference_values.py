"""Print the headline numbers: separatrix values, approximant errors, blow-up times.

Usage: python3 scripts/reference_values.py
"""
import math
import time

from seplab.potential import EModel, Exponential, Higgs, Monomial
from seplab.resum import educated_match, quartic_approximant
from seplab.separatrix import find_separatrix_backward, find_separatrix_shooting, separatrix_series
from seplab.timedomain import blow_up


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, time.perf_counter() - start


def main():
    print("separatrix value at phi = 0")
    for p in (1, 2):
        pot = Monomial(p, phi0=0.0)
        back, tb = timed(find_separatrix_backward, pot)
        shot, ts = timed(find_separatrix_shooting, pot)
        print(f"  v = phi^{2 * p}: backward {back.r:.10f} ({tb:.2f} s)  shooting {shot.r:.10f} ({ts:.2f} s)")

    print("closed-form approximants at phi = 0")
    s = separatrix_series(Monomial(1), 3)
    match = educated_match(s.coeff(1), s.coeff(3))
    r2 = find_separatrix_backward(Monomial(1, phi0=0.0)).r
    r4 = find_separatrix_backward(Monomial(2, phi0=0.0)).r
    print(f"  quadratic: {match(0.0):.6f}  relative error {abs(match(0.0) / r2 - 1):.4%}")
    print(f"  quartic:   {quartic_approximant()(0.0):.6f}  relative error {abs(1 / r4 - 1):.4%}")

    print("separatrix blow-up in the past")
    for pot in (Exponential(0.3), Exponential(0.5), Exponential(0.8), Monomial(1, phi0=0.0),
                Monomial(2, phi0=0.0), Monomial(3, phi0=0.0), EModel(1, 1.0), Higgs(2.0)):
        sep = find_separatrix_backward(pot, phi_far=20.0)
        rep = blow_up(pot, sep.trajectory, separatrix=True)
        t_star = "none" if rep.t_star is None else f"{rep.t_star:.8f}"
        extra = f"  (exact {-1 / pot.alpha ** 2:.8f})" if isinstance(pot, Exponential) else ""
        print(f"  {pot.kind:<12}{pot.describe()['params']}: t* = {t_star}{extra}  [{rep.criterion.value}]")

    print("Higgs a = 1 separatrix check: r(1.5) - (1.5^2 + 1) =",
          f"{find_separatrix_backward(Higgs(1.0), phi0=1.5).r - 3.25:.2e}")
    print(f"sqrt(pi/10) = {math.sqrt(math.pi / 10):.10f}")


if __name__ == "__main__":
    main()
