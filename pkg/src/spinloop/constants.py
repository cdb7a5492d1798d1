"""Unit constants.  Energies are handled in meV, SOC inputs in GHz, rates in MHz.

Ordinary-frequency SOC constants are converted to energy as eps = h * nu.
"""

from scipy import constants as _sc

# Planck constants expressed in meV and seconds
H_MEV_S = _sc.h / _sc.e * 1e3            # 4.1357e-12 meV s
HBAR_MEV_S = _sc.hbar / _sc.e * 1e3      # 6.5821e-13 meV s

# energy of one quantum of ordinary frequency 1 GHz
GHZ_TO_MEV = H_MEV_S * 1e9               # 4.1357e-3 meV

MEV_TO_J = _sc.e * 1e-3
EV_TO_J = _sc.e

# 1 debye in C m (1e-21 C m^2/s divided by c)
DEBYE_CM = 1e-21 / _sc.c

AMU_KG = _sc.atomic_mass
ANGSTROM_M = 1e-10

# Harmonic force constant in meV/(amu Angstrom^2) for a mode of energy
# hw (meV): k = FORCE_CONST_MEV_AMU_A2 * hw^2, from E = 1/2 w^2 Q^2 with
# mass-weighted Q in sqrt(amu) Angstrom.
FORCE_CONST_MEV_AMU_A2 = (MEV_TO_J / _sc.hbar) ** 2 * AMU_KG * ANGSTROM_M**2 / MEV_TO_J

EPSILON_0 = _sc.epsilon_0
HBAR_SI = _sc.hbar
C_SI = _sc.c
