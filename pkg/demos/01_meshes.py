"""Meshes: presets, fan triangulation, red refinement, and the text format.

Every mesh starts as a centroid fan over a convex polygon and is refined
uniformly; refinement preserves all angles and nests the parent vertices,
which is what makes transfer between levels exact later on.
"""

import numpy as np

from semifem import (PRESET_POLYGONS, mesh_size, min_angle, preset_polygon,
                     read_mesh, refine_uniform, triangulate_convex_polygon,
                     write_mesh)

print("built-in domains:", ", ".join(sorted(PRESET_POLYGONS)))

poly = preset_polygon("pentagon")
angles = np.degrees(poly.interior_angles())
print(f"pentagon interior angles (deg): {np.round(angles, 1)}")
print(f"largest angle: {angles.max():.1f} deg  (3*pi/4)")

mesh = triangulate_convex_polygon(poly)
print(f"\nlevel 0: {mesh.num_vertices} vertices, {mesh.num_triangles} triangles, "
      f"h = {mesh_size(mesh):.4f}")

for _ in range(3):
    mesh = refine_uniform(mesh)
    print(f"level {mesh.level}: {mesh.num_vertices} vertices, "
          f"{mesh.num_triangles} triangles, h = {mesh_size(mesh):.4f}, "
          f"min angle = {np.degrees(min_angle(mesh)):.2f} deg")

area = float(np.sum(mesh.signed_areas()))
print(f"\ntriangle areas sum to {area:.15f} (polygon area {poly.area():.15f})")

write_mesh(mesh, "pentagon_level3.txt")
back = read_mesh("pentagon_level3.txt")
print("text round trip exact:",
      np.array_equal(back.vertices, mesh.vertices))
