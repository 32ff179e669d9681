"""Drive the online learner directly: feed it secant-style observations from a
fixed symmetric Jacobian and watch the model-mismatch loss fall while every
played matrix stays inside the feasible set (checked densely).

Run:  python3 demos/03_online_learner.py
"""

import numpy as np

from qnpe import (
    FeasibleSetParams,
    LearnerOption,
    LearnerParams,
    LossObservation,
    Symmetric,
    learner_init,
    loss_value,
    observe_loss,
)

d, mu, l1 = 20, 0.3, 1.0
rng = np.random.default_rng(2)

feasible = FeasibleSetParams(mu=mu, l1=l1, structure=Symmetric())
# the default step size is very conservative (it backs the worst-case regret
# bound); a larger one shows the tracking behaviour within a short demo
params = LearnerParams.make(LearnerOption.OPTION_I, feasible, d, p=0.1, rho=0.3)
state = learner_init((l1 + mu) * np.eye(d), params, rng)

# the hidden Jacobian the learner is trying to match
q = np.linalg.qr(rng.standard_normal((d, d)))[0]
target = (q * rng.uniform(mu, l1, size=d)) @ q.T

print(" t    loss        ||B - A||_F   lam_min(sym B)   ||B||_op")
for t in range(1, 51):
    s = rng.standard_normal(d)
    obs = LossObservation(u=target @ s, s=s)
    loss = loss_value(state.b_current, obs)
    observe_loss(state, obs, params)
    if t % 5 == 0 or t == 1:
        b = state.b_current
        lam = np.linalg.eigvalsh(0.5 * (b + b.T))[0]
        print(f"{t:3d}  {loss:10.4e}  {np.linalg.norm(b - target):11.4e}  "
              f"{lam:13.4f}  {np.linalg.norm(b, 2):9.4f}")

print(f"\nfeasibility floor lam >= mu/2 = {mu / 2}, ceiling ||B|| <= 6.5 L1 = {6.5 * l1}")
print(f"separation oracle calls made: {state.sep_calls}, "
      f"model matvecs spent: {state.matvec_counter.count}")
