"""Cutting planes and spatial branch-and-bound for signomial programs."""

from .dcc import ConvexityClass, DccForm, Sense, classify, dcc_form, normalize, reduce_and_split, term_form
from .envelope import (
    EnvelopeModel,
    Facet,
    UnitScaling,
    bivariate_envelope,
    bivariate_envelope_on_box,
    check_supermodular,
    envelope_value,
    make_envelope_model,
    oa_cut,
)
from .freesets import (
    AffineFunction,
    FreeSetCertificate,
    Membership,
    build_free_set,
    linearize_power,
    maximality_witness,
    membership,
    orthogonal_lift,
    witness_residuals,
)
from .icuts import Cut, CutOrigin, StepLengths, build_cut, select_violated_term, step_length
from .instio import generate, parse_text, read_instance, serialize, shifted_geometric_mean, write_instance
from .lp import LpBasisSolution, LpModel, LpStatus, SimplicialCone, extract_cone
from .lp import solve as lp_solve
from .model import Box, ExponentVector, ExtendedForm, SignomialProgram, eval_term, grad_term, lift
from .sbb import BranchAndBound, Mode, Node, Settings, SolveReport, build_root_relaxation, solve

__version__ = "0.1.0"
