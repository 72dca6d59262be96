"""Frozen reference values.

Each value was computed once outside the package (mpmath at 30 digits,
closed forms, or hand algebra) and pasted here.  Tests compare against
these constants, never against a second call into the package.
"""

# Hénon, sigma = 1.4, beta = 0.3 (mpmath, dps=30)
HENON_X_STAR = 0.631354477089504711681560233836
HENON_GAMMA = -1.76779253585061319270836865474
HENON_LAMBDA = -1.92373885815340712188663108025
HENON_LAMBDA_PRIME = 0.155946322302793929178262425505
HENON_LAMBDA_SQ = 3.7007711943693746469580427046
HENON_LAMBDA_PRIME_SQ = 0.0243192554397668832502411787637
# nonzero root of c / lambda^2 = f(f(c)) reached by mpmath.findroot
HENON_C0 = (-0.0842723208417242539919689594292, -1.40032085108454862066653504821)
HENON_R = -0.131290899029935074025261862606642
HENON_R_PRIME = -6.17928744933793134454574924553924
# c0 = 0: r = 1 / lambda^4, r' = 1 / (lambda lambda')^2 = 1 / beta^2
HENON_R_AT_ZERO = (0.0730155784129174249420493431289, 11.1111111111111111111111111111)

# f(a) = 2a + a^2 has the exact curve a(t) = exp(t) - 1
STEINBERG_C2 = 0.5
STEINBERG_C3 = 1.0 / 6.0
OFFSET_2A_A2 = -1.5
MODE_R_2A_A2 = -0.5

# Weierstrass series, lambda = 2, r = 0.6
DIM_06 = 1.26303440583379378019297778421
TAIL_06_N12 = 0.006530347008
TRUNCATION_06_1EM6 = 30
LINEAR_BOUND_06_T01 = 0.152380952380952380952380952381
EVAL_BOUND_06_N12 = 8.0

# Differential iteration, logistic field, x = t = 1
PROP1_C0 = 2.0
PROP1_SIGMA = -3.0
PROP1_D = 4.0
PREFACTOR_RHO1_SIGMA_M05 = 0.786938680574733152792400930018

# Dominant-mode reduction r0 = 0.5, r1 = 0.9: ceil(6 ln 10 / ln(9/5))
DOMINANT_P = 24
