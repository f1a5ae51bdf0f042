"""Walk through the placement/delivery combinatorics of one configuration.

A base station with L antennas serves K cache-aided users split into
``lambda_states`` groups.  Every file is cut into C(lambda, lambda*gamma)
subfiles; each stage serves G = lambda*gamma + 1 groups at once, Q
spatially multiplexed users per group, and cached side information lets
every served user strip the other groups' signals out of the air.

Run: python demos/scheme_walkthrough.py
"""

import math
from fractions import Fraction

from ccdl.scheme import SchemeConfig, build_delivery_plan, max_gain, validate

# --- validate a system and derive its constants ---------------------------

config = SchemeConfig(L=32, snr_db=20.0, lambda_states=6, gamma=Fraction(1, 3), K=24, Q=4, precoder="ZF")
scheme = validate(config)

print("validated scheme")
print(f"  cache states     lambda = {scheme.lambda_states}, gamma = {scheme.gamma}")
print(f"  groups per stage G      = {scheme.G}   (lambda*gamma + 1)")
print(f"  users per group  B      = {scheme.B},  streams per group Q = {scheme.Q}")
print(f"  stream ratio     c      = {scheme.c}")
print(f"  subpacketization        = {scheme.subpacketization}  (C(lambda, lambda*gamma))")

# --- enumerate one round of the delivery schedule --------------------------

plan = build_delivery_plan(scheme)
print(f"\ndelivery plan: {len(plan.stages)} stages per round, {plan.rounds} round(s)")
print("first three stages (group <- subfile label, served users):")
for stage in plan.stages[:3]:
    parts = [f"{sg.group} <- {set(sg.label) or '{}'} users {sg.users}" for sg in stage.groups]
    print(f"  serve {set(stage.served)}:  " + " | ".join(parts))

# every group must receive each of its needed labels exactly once per round
needed = math.comb(scheme.lambda_states - 1, scheme.G - 1)
got = sum(len(st.groups) for st in plan.stages) // scheme.lambda_states
print(f"labels delivered per group and round: {got} (needed: C(lambda-1, lambda*gamma) = {needed})")

# --- how large a gain fits a subpacketization budget? ----------------------

print("\nlargest gain under a subfile-count budget:")
for gamma, budget in [(Fraction(1, 10), 600_000), (Fraction(1, 5), 600_000), (Fraction(1, 2), 10_000)]:
    lam, gain = max_gain(gamma, budget)
    print(f"  gamma={gamma}: lambda={lam:3d} gives G={gain} within budget {budget:,}")
