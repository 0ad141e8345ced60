"""Toolkit for curves y^2 = x(x^2 + ax + b) with marked rational 2-torsion.

Modules
-------
arithmetic     factorization, valuations, square-free structure, SPF sieve
curve_core     invariants, Kodaira symbols, Tate oracle, conductor, 2-isogeny
real_density   region area: closed form, quadrature, Monte Carlo, lattice counts
local_density  p-adic pattern densities, Euler factors, Dirichlet index sums
census         enumeration by conductor polynomial, family counts, tail decay
uniformity     square-free decompositions, quadric/dyadic/lattice box counts
lp_bounds      exact-rational linear program, certificates, simplex, duality
cli            batch front door with CSV/JSON reports and run manifests
"""

__version__ = "0.1.0"
