"""Flat parameter-vector layout shared by the compiled and pure kernels."""

P_JG = 0        # SG inertia coefficient (system pu)
P_TG = 1        # governor time constant (s)
P_KG = 2        # governor gain (system pu)
P_BG = 3        # GSC-SG synchronizing coefficient (pu)
P_BM = 4        # machine-link synchronizing coefficient (pu)
P_JWT = 5       # WT inertia coefficient (system pu)
P_CDC = 6       # DC-link capacitance coefficient (system pu)
P_TDC = 7       # DC-filter time constant (s)
P_KDG = 8       # GSC derivative gain
P_KTG = 9       # GSC proportional gain
P_KDM = 10      # MSC derivative gain
P_KTM = 11      # MSC proportional gain
P_OMDEL = 12    # rotor-speed setpoint (pu)
P_BETADEL = 13  # pitch setpoint (deg)
P_KP = 14       # proportional pitch gain (deg/pu)
P_TSERVO = 15   # pitch servo time constant (s)
P_RATE = 16     # pitch rate limit (deg/s)
P_KPLIM = 17    # limiter PI proportional gain
P_KILIM = 18    # limiter PI integral gain
P_PMAX = 19     # MSC power limit (pu)
P_OMMAX = 20    # rotor speed limit (pu)
P_W0 = 21       # GSC frequency setpoint (pu)
P_VDCS = 22     # DC voltage setpoint (pu)
P_PG0 = 23      # governor power reference (pu)
P_PCONST = 24   # GFL constant injection (pu)
P_PSCALE = 25   # swept_k * v_w^3 / P_rated (pu power scale)
P_LAMC = 26     # R * omega_nom / v_w (lambda per pu rotor speed)
P_CP0 = 27      # 14 calibrated surface coefficients occupy 27..40
P_CPMAX = 41    # surface peak scale
P_BETAMIN = 42
P_BETAMAX = 43
N_PARAMS = 44

N_STATES = 13
# state ordering:
#   0 th_gsc, 1 th_g, 2 om_g, 3 P_g, 4 v_dc, 5 th_msc, 6 th_r, 7 om_r,
#   8 x_gsc, 9 x_msc, 10 beta, 11 i_speed, 12 i_power

MODE_GFL_MPPT = 0
MODE_GFM_MPPT = 1
MODE_GFM_FR = 2
