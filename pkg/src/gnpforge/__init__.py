"""First vertex of generic Newton polygons for L-functions of exponential sums.

Submodules: ``ffield`` (finite fields), ``cyclotomic`` (Z[zeta_p] and Newton
polygons), ``modular`` (modular equations, density, minimal solutions),
``hasse`` (Hasse polynomial and predictions), ``lfunction`` (exact oracle and
sweeps), ``dwork`` (pi-adic congruence checks) and ``cli``.
"""

__version__ = "0.1.0"
