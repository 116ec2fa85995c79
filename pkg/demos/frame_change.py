"""Changing observers is a projective map between data-point frames.

Two events each define a frame from the stamps they received.  The map
between the frames composes like a groupoid and carries one event's
homogeneous position onto the other's.
"""
import numpy as np

from stereoloc import projective, scenarios
from stereoloc.localization import data_point_frame, embed_event, localize_data_point_3d
from stereoloc.positioning import assemble_data_point_3d

con = scenarios.static_3d()
events = [np.array([1.0, 0.2, 0.1]), np.array([2.0, -0.5, 0.3]), np.array([3.0, 0.0, -0.8])]
dps = [assemble_data_point_3d(con, e) for e in events]
frames = [data_point_frame(dp) for dp in dps]

gab = projective.groupoid_pt(frames[0], frames[1], "a", "b")
gbc = projective.groupoid_pt(frames[1], frames[2], "b", "c")
gac = projective.groupoid_pt(frames[0], frames[2], "a", "c")
print("g_bc g_ab vs g_ac:", projective.proj_distance((gbc @ gab).matrix.ravel(), gac.matrix.ravel()))

pa = embed_event(localize_data_point_3d(dps[0]))
pb = embed_event(localize_data_point_3d(dps[1]))
print("g_ab p_a:", gab.matrix @ pa)
print("p_b:     ", pb)
