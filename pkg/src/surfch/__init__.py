"""Cahn-Hilliard dynamics with a logarithmic potential on evolving surfaces.

Library layout:

- :mod:`surfch.geometry`: analytic surface families (flow maps, velocities,
  level sets, closest-point projections, exact surface integrals).
- :mod:`surfch.meshing`: icosphere and torus-grid triangulations, node
  advection under a family's flow map, mesh quality measurement.
- :mod:`surfch.assembly`: lumped/consistent mass and stiffness matrices.
- :mod:`surfch.potential`: the logarithmic potential, its convex part and
  derivatives, and the quadratic regularization used by the solver fallback.
- :mod:`surfch.operators`: interpolation, constrained projections, discrete
  inverse Laplacians and negative-order norms, inter-mesh prolongation.
- :mod:`surfch.solver`: the implicit mass-lumped time stepper with a
  feasibility-preserving damped Newton method and regularized fallback.
- :mod:`surfch.diagnostics`: per-step observables (energy, mass, bounds,
  velocity-divergence sign) and convergence-order arithmetic.
- :mod:`surfch.cli`: experiment presets, configuration files, trace/snapshot
  output, the convergence-study driver, and the property-suite runner.
"""

__version__ = "0.1.0"
