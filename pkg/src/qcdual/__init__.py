"""Desk-scale duality for quasiconvex conditional risk measures on finite filtered spaces."""

from .acceptance import (RiskAcceptanceFamily, audit_family, family_from_measure, measure_from_family,
                         roundtrip_check)
from .dualtransform import (DualSurface, R, R_inequality, cas_identity_check, conjugate,
                            ddd_inequality_check, duality_sup, lemma_down_checks, restriction_check,
                            script_R)
from .maximalsets import ess_sup_class, maximal_sets, trivial_component
from .mclass import (DualCandidate, audit_kk, candidate_from_measure, lemma_program_check,
                     uniqueness_check)
from .probspace import (FiniteFilteredSpace, GSet, conditional_expectation, conditional_p_norm,
                        is_g_measurable, paste)
from .riskmeasures import (CATALOG, RiskMeasure, audit_all, audit_cas_csa, audit_evq, audit_mon_down,
                           audit_qco, audit_reg, effectiveness_partition, make_measure, parse_measure)
from .scenarios import paste_scenarios, q_conditional_expectation, scenario_grid, validate_scenario
from .separation import GeneratorSet, concatenation_hull, is_outside, separate

__all__ = [
    "CATALOG", "DualCandidate", "DualSurface", "FiniteFilteredSpace", "GSet", "GeneratorSet", "R",
    "R_inequality", "RiskAcceptanceFamily", "RiskMeasure", "audit_all", "audit_cas_csa", "audit_evq",
    "audit_family", "audit_kk", "audit_mon_down", "audit_qco", "audit_reg", "candidate_from_measure",
    "cas_identity_check", "concatenation_hull", "conditional_expectation", "conditional_p_norm",
    "conjugate", "ddd_inequality_check", "duality_sup", "effectiveness_partition", "ess_sup_class",
    "family_from_measure", "is_g_measurable", "is_outside", "lemma_down_checks", "lemma_program_check",
    "make_measure", "maximal_sets", "measure_from_family", "parse_measure", "paste", "paste_scenarios",
    "q_conditional_expectation", "restriction_check", "roundtrip_check", "scenario_grid", "script_R",
    "separate", "trivial_component", "uniqueness_check", "validate_scenario",
]
