"""Exact t-wise uniform permutation families from recursive design-based
combination, with brute-force verification tools."""

from .base_families import (
    PrimeField,
    affine_family,
    alternating_family,
    best_base,
    cyclic_family,
    mobius_family,
    symmetric_family,
)
from .combiner import (
    OrderedPartitionFamily,
    RecursionPlan,
    build,
    combine,
    combine_k,
    make_mu,
    make_mu_k,
    naive_size,
    plan,
    plan_k,
    size_table,
)
from .designs import (
    DesignCertificate,
    Selection,
    SelectionReport,
    certify_design,
    check_selection,
    complete_selection,
    design_lower_bound,
    search_design,
)
from .perm_core import (
    CapExceeded,
    FormatError,
    Permutation,
    PermFamily,
    compose,
    family_get,
    identity,
    inverse,
    rank_subset,
    unrank_subset,
)
from .verifier import (
    PairQuery,
    TupleQuery,
    UniformityReport,
    check_pair_statistics,
    check_pair_statistics_all,
    check_uniform,
    sampled_check,
)

__version__ = "0.1.0"
