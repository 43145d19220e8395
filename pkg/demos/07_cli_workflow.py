"""
The command-line workflow, end to end
=====================================

The same thing you would do in a shell:

    amtopo run run.cfg --set max_iterations=60
    amtopo sweep out/rho_bar.vtk --angles 30,45,60
    amtopo timing out/iters.csv

Each run leaves four artifacts in its output directory: iters.csv (one
row per iteration, appended live), rho_bar.vtk (density snapshots),
npup.csv (overhang sweep), and config.echo (the fully resolved
configuration, reusable as a config file).
"""

import tempfile
from pathlib import Path

from amtopo import cli

work = Path(tempfile.mkdtemp(prefix="amtopo_demo_"))
out = work / "out"

(work / "run.cfg").write_text(f"""
# a small self-weight cantilever
case = cantilever2d
formulation = self_weight
l = 6
w0 = 0.25
Lx = 3.0
Ly = 1.5
nx = 36
ny = 18
r_bar = 0.25
beta_max = 8.0
beta_double_every = 15
tol = 0.0
out_dir = {out}
""")

print(">>> amtopo run run.cfg --set max_iterations=60")
code = cli.main(["run", str(work / "run.cfg"), "--set", "max_iterations=60"])
print(f"(exit code {code}; 0 = converged, 3 = iteration cap)\n")

print(">>> amtopo sweep out/rho_bar.vtk --angles 30,45,60")
cli.main(["sweep", str(out / "rho_bar.vtk"), "--angles", "30,45,60"])
print()

print(">>> amtopo timing out/iters.csv")
cli.main(["timing", str(out / "iters.csv")])
print()

print("artifacts:")
for p in sorted(out.iterdir()):
    print(f"  {p.name:14s} {p.stat().st_size:8d} bytes")
