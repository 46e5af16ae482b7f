"""Balancedness analysis for substitution subshifts and dendric words."""

from .words import Alphabet, Word, abelianize, count_occurrences, factors_of
from .substitution import (
    BlockCoding,
    LanguageCache,
    ReturnWordSet,
    Substitution,
    generate_prefix,
    is_primitive,
    k_block_substitution,
    language,
    language_cache,
    return_words,
    substitution_matrix,
    two_block_substitution,
)
from .linalg import (
    MatrixClass,
    ModularPeriod,
    SpectralAmbiguityError,
    SpectrumReport,
    char_poly,
    cyclotomic,
    perron_data,
    pisot_classify,
    power_mod_period,
)
from .balance import (
    BalanceProfile,
    DeviationVector,
    DiscrepancyEstimate,
    FrequencyTable,
    TowerStats,
    admissible_level,
    balance_profile,
    constancy_level,
    deviation_literal,
    deviation_vector,
    discrepancy_estimate,
    factor_frequencies,
    frequency_of,
    letter_frequencies,
    tower_stats,
    transport_deviation,
)
from .certificates import (
    ImbalanceCertificate,
    PotentialResult,
    SpectralBalanceReport,
    divisibility_certificate,
    potential_test,
    spectral_balance_report,
    symmetric_constant_length_check,
    verify_certificate,
)
from .dendric import (
    ArnouxRauzyLanguage,
    Decomposition,
    DendricReport,
    DirectiveSequence,
    ExtensionGraph,
    arnoux_rauzy_word,
    ar_run_bound,
    cylinder_decomposition,
    dendric_check,
    extension_graph,
    letters_vs_factors_probe,
    tree_edge_solve,
    verify_decomposition,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
