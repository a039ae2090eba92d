# solver/__init__.py
from .base_solver import BaseDecoder, FitOptions, FitReport, ForwardBackwardResult
from .msar_solver import (
    SwitchingARDecoder, emission_logdensity, viterbi, forward_backward,
    forward_backward_full, path_loglikelihood, decode_with_posteriors,
)
from .estimation import (
    estimate_ar_single, weighted_ls_update, update_sigma, update_transitions,
)
from .em_solver import (
    EMViterbiSolver, BaumWelchSolver,
    fit_em_viterbi, fit_baum_welch_step, fit_baum_welch,
    search_start, canonical_regime_order,
)
from .hmm_solver import GaussianHMMDecoder, SimpleHMMSolver, fit_simple_hmm, decode_simple_hmm
