"""
Transfer function algebra
=========================

Rational functions with polynomial roots, feedback, realization and the
bilinear discretization used by the controllers.
"""

# %%
import numpy as np

from hybridmotion import RationalTF, format_tf, parse_tf, tf_feedback, tf_to_state_space
from hybridmotion.ratfun import discretize_tustin

# coefficients are in ascending powers of s
G = RationalTF([0.0408], [0.0, 1.0, 0.00668])
print(format_tf(G))
print("poles:", G.poles())

# %%
# unity feedback with a proportional gain
T = tf_feedback(RationalTF.constant(429.0) * G)
print(format_tf(T))
print("closed-loop poles:", T.poles())

# %%
# the text format round-trips
assert parse_tf(format_tf(T)).equivalent(T)

# %%
# a realization and its Tustin image at 10 kHz
ss = tf_to_state_space(T)
ssd = discretize_tustin(ss, 1e-4)
w = np.array([1.0, 100.0, 1000.0])
print("continuous |T|:", np.abs(T.freqresp(w)))
print("discrete   |T|:", np.abs(ssd.freqresp(w)))
