"""Three moving emitters plus an anchor in 2+1 dimensions.

Each station sees a projective line of stamps and reads the user's position
on it as a point of RP1.  Three stations give three stamps, the anchor gives
the fourth homogeneous coordinate.
"""
import numpy as np

from stereoloc import oracles, scenarios
from stereoloc.localization import (
    embed_event,
    localize_3d_planes,
    localize_data_point_3d,
    plane_angle,
    plane_stations,
)
from stereoloc.positioning import assemble_data_point_3d, assemble_echo_3d, emission_coordinates

con = scenarios.moving_3d()
e = np.array([2.0, 0.4, -0.7])

dp = assemble_data_point_3d(con, e)
for r in dp.records:
    print(f"station {r.station}: frame stamps {np.round(r.targets, 6)}, reading {r.reading}")

p = localize_data_point_3d(dp)
print("intrinsic stamps:", p.stamps)
print("cross-ratio oracle:", oracles.direct_stereo_3d(con, e))
print("homogeneous point:", embed_event(p))

# the plane procedure needs a user worldline and one angle per station
recs = assemble_echo_3d(con, e)
p_e = emission_coordinates(con, e)
stations = plane_stations(recs, [0.0] * 3)
angles = [plane_angle(s, p_e) for s in stations]
sol = localize_3d_planes(plane_stations(recs, angles))
print("plane intersection:", sol.event, "vs emission coordinates", p_e)
