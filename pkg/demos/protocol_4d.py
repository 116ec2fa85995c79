"""The 3+1 protocol: four stations, two output stamps each, one free scale.

The free projective scale of each station has to be chosen so that the four
stations agree on the stamps they share.  Taking the anchor stamp for every
scale does not close the constraints; solving for the consistent scales does.
"""
import numpy as np

from stereoloc import scenarios
from stereoloc.localization import localize_data_point_4d
from stereoloc.positioning import assemble_station_records_4d

con = scenarios.static_4d()
e = np.array([1.5, 0.3, -0.2, 0.4])
_, dp = assemble_station_records_4d(con, e)

for rule in ("fixed", "consistent"):
    p = localize_data_point_4d(dp, lambda_rule=rule)
    print(f"{rule:>10}: lambdas {np.round(p.lambdas, 6)}")
    print(f"{'':>10}  constraint residuals {p.constraint_residuals}")
    print(f"{'':>10}  stamps {p.stamps}")
