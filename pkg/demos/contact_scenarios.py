"""
Contact with a soft object
==========================

The trapezoidal run with a penetrable object in the return path, first with
the stiff PID alone, then with the supervisor reshaping to a viscous or a
viscoelastic controller.
"""

# %%
from hybridmotion.simcore import DiscreteController, HybridSupervisor, paper_scenario, run_scenario
from hybridmotion.synthesis import PAPER_PID, RESHAPE_THRESHOLD, ReshapeSpec, make_experimental_soft


def run(soft_kind=None, with_object=True):
    scn = paper_scenario(with_object=with_object)
    stiff = DiscreteController.from_pid(PAPER_PID, scn.Ts)
    if soft_kind is None:
        return run_scenario(scn, stiff)
    soft = make_experimental_soft(soft_kind, ReshapeSpec(sat_limit=RESHAPE_THRESHOLD))
    return run_scenario(scn, stiff, DiscreteController.from_soft(soft, scn.Ts), HybridSupervisor(soft_kind=soft_kind))


# %%
keys = ("switch_time", "final_x", "max_penetration", "final_penetration", "final_mean_u", "final_mean_abs_u")
for label, res in [
    ("free motion", run("viscous", with_object=False)),
    ("stiff only", run()),
    ("reshape viscous", run("viscous")),
    ("reshape viscoelastic", run("viscoelastic")),
]:
    print(label)
    for k in keys:
        print(f"  {k:>18} = {res.summary[k]:.6g}")
