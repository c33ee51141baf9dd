"""Spin-squeezing witnesses and entanglement-depth certification for cold atoms.

Modules
-------
spin      angular momentum matrices and expectation helpers
fj        the minimal-variance curve F_j(X) behind the depth bounds
moments   shot records and jackknifed moment summaries
depth     Sorensen-Molmer depth certificates and xi^2
gssi      generalized spin-squeezing inequalities and the Duan bound
thermal   ideal Bose gas in a harmonic trap
symsim    first-quantization simulator and synthetic data
"""
from .depth import (DepthCertificate, InconsistentMomentsError, NonPrefixExclusionError,
                    certify_depth, phase_uncertainty, shot_noise_limit, sm_bound, wineland_xi2)
from .fj import (CurveCache, EvalMode, FjCurve, IncompleteScanError, ScanGrid, brute_force_fj,
                 compute_fj, default_cache, eval_fj, fj_exact, minimal_variance_state)
from .gssi import (DuanResult, InequalityReport, duan_bound, duan_min_k, eval_complete_set_fixed,
                   eval_complete_set_fluctuating)
from .moments import MomentSummary, ShotRecords, estimate, jackknife_se, load_shots
from .spin import Spin, build_spin_operators, expectation, ground_state, variance
from .symsim import (BlockProductState, CollectiveSpinState, DensityFQ, FluctuatingState,
                     OccupationPattern, PureStateFQ, build_dicke_state, exact_moments,
                     local_site_expectation, obs3_check, sample_shots, symmetrize, xi2_state)
from .thermal import CondensedPhaseError, ThermalReport, TrapSpec, solve_mu, total_number

__version__ = "0.1.0"
