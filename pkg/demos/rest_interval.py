"""What happens when the joint stops moving.

The E06 preset holds every joint angle still from 164 s to 184 s. A static
pose admits a whole arc of offsets, so the distance term keeps the estimate
where it was. It cannot follow drift it cannot see: the error grows by the
drift accumulated during the rest and shrinks again once motion resumes.

    python demos/rest_interval.py
"""

import numpy as np

from romheading import DriftSpec, NoiseSpec, cmc_joint, delta_error, run_estimator, scenario_presets, simulate

joint = cmc_joint()
for rate in (0.05, 0.2):
    sim = simulate(joint, scenario_presets()["E06"], DriftSpec(np.radians(40), np.radians(rate)), NoiseSpec(),
                   seed=0)
    timeline = run_estimator(sim.ori1, sim.ori2, joint)
    t = sim.ori1.t
    err = np.degrees(delta_error(sim.truth.delta, timeline.at(t)))
    print(f"\ndrift {rate} deg/s")
    for a, b in ((150, 164), (164, 184), (184, 200)):
        sel = (t >= a) & (t < b)
        print(f"  {a:3d}-{b:3d} s: error mean {np.nanmean(err[sel]):5.2f} deg, max {np.nanmax(err[sel]):5.2f} deg")
