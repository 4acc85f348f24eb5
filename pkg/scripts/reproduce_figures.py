"""Write the plot data behind the six phase-space figures as CSV files.

Usage: python3 scripts/reproduce_figures.py [OUTDIR]   (default: figures/)

Each figure gets its own sub-directory. Figures 2 and 6 go through the
command-line frontend; the others use the library directly.
"""
import argparse
import math
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from seplab import cli
from seplab.flow import PhasePoint, classify, integrate, isocline
from seplab.potential import ModulatedExp, Monomial
from seplab.separatrix import find_separatrix_backward


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cli.to_csv(header, rows))


def fig1(out: Path):
    """Oscillating quadratic-model orbits in (phi, phidot) and their h arcs."""
    pot = Monomial(1)

    def rhs(t, y):
        phi, phidot = y
        h = math.sqrt(phidot ** 2 + float(pot.v(phi)))
        return [phidot, -h * phidot - 0.5 * float(pot.dv(phi))]

    starts = [(3.0, 0.0), (-2.0, 4.0), (1.0, -6.0)]
    for i, y0 in enumerate(starts):
        sol = solve_ivp(rhs, (0.0, 25.0), y0, method="DOP853", rtol=1e-10, atol=1e-12,
                        t_eval=np.linspace(0.0, 25.0, 2501))
        phi, phidot = sol.y
        h = np.sqrt(phidot ** 2 + pot.v(phi))
        # a new monotonic piece starts wherever phidot changes sign
        arc = np.concatenate([[0], np.cumsum(np.diff(np.signbit(phidot)) != 0)])
        write_csv(out / f"orbit_{i}.csv", ["t", "phi", "phidot", "h", "arc"],
                  zip(sol.t, phi, phidot, h, arc))


def fig2(out: Path):
    """Type-A, type-B and separatrix curves for v = phi^2."""
    code = cli.main(["portrait", "--potential", "monomial:p=1", "--phi0", "0",
                     "--h0-list", "0.45,0.75", "--horizon", "6", "--out", str(out)])
    if code:
        raise SystemExit(code)
    x = np.linspace(0.0, 6.0, 121)
    write_csv(out / "boundary.csv", ["phi", "h"], zip(x, x))


def fig3(out: Path):
    """The figure-2 curves in the frak_h = h/sqrt(v) chart."""
    pot = Monomial(1)
    sep = find_separatrix_backward(pot, phi0=0.0)
    curves = {"separatrix": sep.trajectory}
    for name, h0 in (("type_a", 0.45), ("type_b", 0.75)):
        curves[name] = classify(pot, PhasePoint(0.0, h0), horizon=6.0).trajectory
    for name, traj in curves.items():
        m = (traj.phi > 0.05) & (traj.phi <= 6.0)
        with np.errstate(divide="ignore"):
            frak = traj.frak_h(pot)
        write_csv(out / f"{name}.csv", ["phi", "frak_h"], zip(traj.phi[m], frak[m]))


def fig4(out: Path):
    """Slope field, isocline and backwards-invariant strip for v = phi^2."""
    pot = Monomial(1)
    alpha0 = math.sqrt(5) / 3
    phi0 = 1.02 / alpha0
    iso = 1 / math.sqrt(1 - alpha0 ** 2)
    rows = []
    for x in np.linspace(phi0, phi0 + 6.0, 25):
        for y in np.linspace(1.0, 2.0, 21):
            # frak_h' = sqrt(frak_h^2 - 1) - frak_v frak_h
            rows.append((x, y, math.sqrt(y * y - 1) - float(pot.frak_v(x)) * y))
    write_csv(out / "slopes.csv", ["phi", "frak_h", "slope"], rows)
    x = np.linspace(phi0, phi0 + 6.0, 61)
    write_csv(out / "lines.csv", ["phi", "lower", "strip_top", "isocline"],
              [(xi, 1.0, iso, isocline(pot, xi)) for xi in x])
    sep = find_separatrix_backward(pot, phi0=phi0, phi_far=phi0 + 20.0)
    m = sep.trajectory.phi <= phi0 + 6.0
    write_csv(out / "separatrix.csv", ["phi", "frak_h"],
              zip(sep.trajectory.phi[m], sep.trajectory.frak_h(pot)[m]))


def fig5(out: Path):
    """Unbounded separatrix of the modulated exponential and nearby orbits."""
    pot = ModulatedExp()
    x = np.linspace(pot.phi0, pot.phi0 + 10.0, 201)
    write_csv(out / "separatrix.csv", ["phi", "frak_h"], zip(x, pot.exact_solution(x) / pot.u(x)))
    h_sep = float(pot.exact_solution(pot.phi0))
    for i, scale in enumerate((0.97, 0.99, 1.01, 1.03)):
        traj = integrate(pot, PhasePoint(pot.phi0, h_sep * scale), pot.phi0 + 10.0)
        write_csv(out / f"orbit_{i}.csv", ["phi", "frak_h"], zip(traj.phi, traj.frak_h(pot)))


def fig6(out: Path):
    """Numerical separatrix, erfc approximant and [1,1] Pade for v = phi^2."""
    code = cli.main(["compare", "--potential", "monomial:p=1", "--phi0", "0", "--phi-max", "5",
                     "--points", "251", "--pade", "1,1", "--out", str(out)])
    if code:
        raise SystemExit(code)


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("outdir", nargs="?", type=Path, default=Path("figures"))
    parser.add_argument("--only", choices=sorted(FIGURES), action="append")
    args = parser.parse_args()
    for name in args.only or sorted(FIGURES):
        FIGURES[name](args.outdir / name)
        print(f"{name}: {args.outdir / name}")


if __name__ == "__main__":
    main()
