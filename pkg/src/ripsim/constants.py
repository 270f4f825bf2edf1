"""Unit conventions and physical constants.

Internal units everywhere: time in microseconds, energies and couplings as
angular frequencies in rad/us, magnetic fields entered in millitesla.
"""

# Electron gyromagnetic conversion, g_e * mu_B / hbar, in rad us^-1 mT^-1.
# This single constant fixes the mT <-> rad/us correspondence for both the
# Zeeman term and hyperfine couplings quoted in millitesla.
GAMMA_E_RAD_PER_US_PER_MT = 176.0859

#: Hard cap on the Hilbert-space dimension (keeps superoperators <= 65536^2).
DIM_CAP_DEFAULT = 256
