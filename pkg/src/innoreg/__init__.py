"""Regional innovation toolkit: panels, diversity indices, pooled OLS,
and a patent-licensing duopoly solver."""

from .game import (Equilibrium, EquilibriumFlags, MarketParams, RoyaltySolution,
                   VerificationReport, equilibrium_at_royalty,
                   feasibility_region, follower_best_response,
                   follower_equilibrium_quantity, follower_profit,
                   inverse_demand, leader_optimal_quantity, leader_profit,
                   leader_profit_at, optimal_royalty, royalty_foc,
                   royalty_profit_profile, spne, verify_equilibrium)
from .indices import (HooverResult, ShareVector, VarietyResult, hoover_index,
                      indices_table, related_variety, theil_index,
                      unrelated_variety, variety_decomposition)
from .panel import (DescriptiveStats, EmploymentTable, ImputationResult,
                    PanelError, PanelParseError, RegionalPanel, VariableStats,
                    correlation_matrix, descriptive_stats,
                    impute_by_apportionment, lag, load_employment, load_panel)
from .regression import (CollinearityError, Interaction, RegressionResult,
                         RegressionSpec, Regressor, SuiteEntry,
                         VarianceDecomposition, elasticity,
                         format_decomposition_table, format_suite_grid,
                         interaction_term, orthogonalize, pooled_ols,
                         robust_covariance, robust_se, run_model_suite,
                         significance_stars, variance_decomposition, vif)
from .synth import nearest_psd, synthesize_panel

__version__ = "0.1.0"

__all__ = [
    "CollinearityError",
    "DescriptiveStats",
    "EmploymentTable",
    "Equilibrium",
    "EquilibriumFlags",
    "HooverResult",
    "ImputationResult",
    "Interaction",
    "MarketParams",
    "PanelError",
    "PanelParseError",
    "RegionalPanel",
    "RegressionResult",
    "RegressionSpec",
    "Regressor",
    "RoyaltySolution",
    "ShareVector",
    "SuiteEntry",
    "VariableStats",
    "VarianceDecomposition",
    "VarietyResult",
    "VerificationReport",
    "correlation_matrix",
    "descriptive_stats",
    "elasticity",
    "equilibrium_at_royalty",
    "feasibility_region",
    "follower_best_response",
    "follower_equilibrium_quantity",
    "follower_profit",
    "format_decomposition_table",
    "format_suite_grid",
    "hoover_index",
    "impute_by_apportionment",
    "indices_table",
    "interaction_term",
    "inverse_demand",
    "lag",
    "leader_optimal_quantity",
    "leader_profit",
    "leader_profit_at",
    "load_employment",
    "load_panel",
    "nearest_psd",
    "optimal_royalty",
    "orthogonalize",
    "pooled_ols",
    "related_variety",
    "robust_covariance",
    "robust_se",
    "royalty_foc",
    "royalty_profit_profile",
    "run_model_suite",
    "significance_stars",
    "spne",
    "synthesize_panel",
    "theil_index",
    "unrelated_variety",
    "variance_decomposition",
    "variety_decomposition",
    "verify_equilibrium",
    "vif",
]
