"""Decide which properties of a network's interaction matrix the data can pin down."""

from ._accel import NUMBA_ENABLED
from .errors import (DataInconsistent, EvaluationError, InsufficientData, NetReconError, ParameterError, ParseError,
                     PreconditionError, ScaleError, SimulationBlowup)
from .geometry import Box, Fiber, PriorSet, fiber_intersects, property_distinguishable, separate_by_fiber, sign_boxes
from .gram import GramSummary, compute_gram, pe_check
from .group import GroupElement, generic_verdict, kernel_orbit_containment, orbit_label, same_orbit
from .model import (GlvParameters, InputSignal, RegressorFamily, SinusoidalForcing, Trajectory, estimate_derivatives,
                    glv_steady_state, random_stable_glv, simulate)
from .perturb import DeformationSpec, deform, indistinguishable_pair, probe_orbit_instability, probe_pe_stability
from .properties import property_of
from .reconstruct import Verdict, reconstruct_adjacency_under_uncertainty, reconstruct_network, reconstruct_property

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "DataInconsistent",
    "EvaluationError",
    "InsufficientData",
    "NetReconError",
    "ParameterError",
    "ParseError",
    "PreconditionError",
    "ScaleError",
    "SimulationBlowup",
    "Box",
    "Fiber",
    "PriorSet",
    "fiber_intersects",
    "property_distinguishable",
    "separate_by_fiber",
    "sign_boxes",
    "GramSummary",
    "compute_gram",
    "pe_check",
    "GroupElement",
    "generic_verdict",
    "kernel_orbit_containment",
    "orbit_label",
    "same_orbit",
    "GlvParameters",
    "InputSignal",
    "RegressorFamily",
    "SinusoidalForcing",
    "Trajectory",
    "estimate_derivatives",
    "glv_steady_state",
    "random_stable_glv",
    "simulate",
    "DeformationSpec",
    "deform",
    "indistinguishable_pair",
    "probe_orbit_instability",
    "probe_pe_stability",
    "property_of",
    "Verdict",
    "reconstruct_adjacency_under_uncertainty",
    "reconstruct_network",
    "reconstruct_property",
]
