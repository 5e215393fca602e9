"""friendlab: desk-scale simulation and feasibility analysis for Extended
Wigner's Friend experiments.

Subpackages:

* hilbert -- dense state-vector engine (tensor products, unitaries,
  projective measurement, Born sampling);
* scenarios -- builders for the sealed-lab, frame-relational, four-observer
  and sequential-measurement experiments;
* marginal_polytope -- exact-rational feasibility of pairwise targets via
  phase-1 simplex, cross-checked against the analytic CHSH criterion;
* relmodel -- Monte Carlo runs of the frame-relational model where frame
  relations exist only on ask runs;
* statlab -- empirical distributions, TV distance, correlation estimators;
* cli -- command-line orchestration and the acceptance suite.
"""

from . import hilbert, marginal_polytope, relmodel, scenarios, statlab

__all__ = ["hilbert", "scenarios", "marginal_polytope", "relmodel", "statlab"]

__version__ = "0.1.0"
