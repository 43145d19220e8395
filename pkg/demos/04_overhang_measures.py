"""
Measuring overhangs: PUP, NPUP, and grayness
============================================

A printed layer can only lean so far over the one below it. The
projected undercut perimeter (PUP) integrates how much downward-facing
surface exceeds a threshold angle; dividing by the domain volume gives
the normalized NPUP used to compare designs. Grayness measures how
binary a design is. None of these need a mesh of the final part; they
read the nodal density field directly.
"""

import numpy as np

from amtopo.mesh import build_mesh
from amtopo.metrics import grayness, npup_sweep, pup

mesh = build_mesh((3.0, 2.0), (48, 32))
x, y = mesh.node_coords().T


def ceiling(center, width):
    # solid above a horizontal interface: the worst case, a flat roof
    return 0.5 * (1.0 + np.tanh((y - center) / width))


def wall(center, width):
    # solid to the right of a vertical interface: fully printable
    return 0.5 * (1.0 + np.tanh((x - center) / width))


flat = ceiling(1.0, 0.08)
vert = wall(1.5, 0.08)

print("PUP at a 45 degree threshold:")
print(f"  flat ceiling : {pup(flat, mesh, 45.0):7.4f} "
      f"(about the 3.0 m domain width)")
print(f"  vertical wall: {pup(vert, mesh, 45.0):7.4f} (suppressed)")
print(f"  uniform field: {pup(np.full(mesh.nnode, 0.7), mesh, 45.0):7.4f}")

# The same ceiling measured at several threshold angles: a stricter
# (larger) angle counts more of the surface as overhanging.
print("\nNPUP sweep of the flat ceiling:")
for report in npup_sweep(flat, mesh, (30.0, 45.0, 60.0)):
    print(f"  {report.angle_deg:4.0f} deg: PUP={report.pup:.4f} "
          f"NPUP={report.npup:.4f}")

# Grayness: 0 for a black-and-white design, 1 for a uniform 50% blur.
sharp = (np.linspace(0, 1, 100) > 0.5).astype(float)
print("\ngrayness:")
print(f"  binary field : {grayness(sharp):.4f}")
print(f"  uniform 0.5  : {grayness(np.full(100, 0.5)):.4f}")
print(f"  tanh ceiling : {grayness(0.5 * (1 + np.tanh((y - 1) / 0.3))):.4f}")
