"""
Loop shaping and sensitivity
============================

Stiff loop shaping, the viscous impedance controller, and the sensitivity
of the experimental PID and reshaped controllers on the identified stage.
"""

# %%
import math

import numpy as np

from hybridmotion import synthesis as syn
from hybridmotion.analysis import BodeGrid, bode_magnitude
from hybridmotion.ratfun import RationalTF, tf_feedback

G = RationalTF.from_zpk([], [-10.0, -1000.0], 1e4)
w0 = alpha = 100.0
Cs = syn.make_stiff_loopshape(G, w0)
Cv = syn.make_viscous_impedance(G, alpha, math.inf)

# %%
# the stiff loop is the critically damped pair, -6 dB at w0
H = tf_feedback(Cs * G)
print("|H(j w0)| =", abs(H.freqresp(w0)))

# %%
# disturbance sensitivity: the stiff loop flattens at low frequency, the
# viscous one keeps rising like 1/(alpha w)
grid = BodeGrid(1e-1, 1e4, 2)
Ss = bode_magnitude(syn.sensitivity(G, Cs), grid)
Sv = bode_magnitude(syn.sensitivity(G, Cv), grid)
print(f"{'omega':>10} {'|S_s| dB':>10} {'|S_v| dB':>10}")
for a, b in zip(Ss, Sv):
    print(f"{a.omega:10.3g} {a.mag_db:10.2f} {b.mag_db:10.2f}")

# %%
# control effort for a disturbance is similar for both designs
Us = syn.control_sensitivity(G, Cs)
Uv = syn.control_sensitivity(G, Cv)
for x in (1.0, 10.0, 50.0):
    print(x, abs(Us.freqresp(x)), abs(Uv.freqresp(x)))

# %%
# the experimental controllers on the identified stage
P = syn.nominal_plant()
spec = syn.ReshapeSpec(sat_limit=syn.RESHAPE_THRESHOLD)
curves = {
    "PID": syn.sensitivity(P, syn.make_pid(syn.PAPER_PID)),
    "viscous": syn.sensitivity(P, syn.make_experimental_soft("viscous", spec).linear_equivalent()),
    "viscoelastic": syn.sensitivity(P, syn.make_experimental_soft("viscoelastic", spec).linear_equivalent()),
}
for name, S in curves.items():
    mags = np.abs(S.freqresp(np.array([0.1, 1.0, 10.0])))
    print(f"{name:>13}", " ".join(f"{20 * np.log10(m):8.2f}" for m in mags))
