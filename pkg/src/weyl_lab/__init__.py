"""Numerical laboratory for Weyl's law on SL(n, Z)-type quotients.

Submodules: rootsys (root data and coordinates), plancherel (c-function and
Plancherel density), spherical (Iwasawa projection and spherical
functions), testfn (Paley-Wiener test functions and their functionals),
weyl_main (main-term integrals), sl2tf (the SL(2) trace formula for
Gamma(N)), morselab (critical points and sublevel estimates) and cli.
"""

__version__ = "0.1.0"
