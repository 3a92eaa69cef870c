"""Closed-form delay, throughput and failure results plus brute-force oracles."""

from ._numeric import DivergenceError
from .busy import (
    BusyMoments,
    BusyTimePmf,
    busy_s_max,
    busy_tail_bound,
    busy_time_moments,
    busy_time_pmf,
    busy_time_prob,
    decoding_cost,
    delay_upper_bound,
    delay_upper_bound_per_info,
    binomial_identity_sides,
    renewal_rate,
    cycle_lemma_count,
    third_moment_table_form,
    throughput_tail,
    worst_case_sum_delay,
)
from .failure import (
    FailureBoundReport,
    NumericFailure,
    corollary_failure_bound,
    exact_failure_numeric,
    failure_report,
    full_rank_probability,
    monte_carlo_full_rank,
    rank_bounds,
    sample_admissible_pattern,
    solve_epsilon0,
    stream_failure_bound,
    zero_counts,
)
from .group import group_busy_pmf, group_busy_prob, group_delay_per_packet, group_tail_bound, group_worst_sum_delay
from .lattice import (
    group_dominating_sequence,
    group_np_count,
    group_np_count_det,
    kreweras_count,
    kreweras_enumerate,
    kreweras_matrix,
    kreweras_recursion,
    kreweras_step,
)
from .oracles import OracleResult, oracle_busy_counts, oracle_busy_pmf, oracle_np_count
