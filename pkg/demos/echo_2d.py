"""Two static emitters on a line, one user event between them.

Each emitter relays the other's latest stamp; the user reads both pairs and
recovers its emission coordinates without knowing where anybody is.
"""
import numpy as np

from stereoloc import scenarios
from stereoloc.localization import localize_2d
from stereoloc.positioning import assemble_echo_2d, cartesian_of_emission, emission_coordinates

con = scenarios.static_2d()
e = np.array([1.0, 4.0])

p1, p2 = assemble_echo_2d(con, e)
print("echo pair from E1:", p1)
print("echo pair from E2:", p2)

q = localize_2d(p1, p2)
print("stereometric coordinates:", q)
print("emission coordinates:    ", emission_coordinates(con, e))

# in 1+1 the two grids coincide, so the event itself comes back
print("recovered event:", cartesian_of_emission(con, q, guess=e))
