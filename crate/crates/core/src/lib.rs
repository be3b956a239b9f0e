//! Exact solvers for fair division of indivisible goods under EFX and EFX₀
//! constraints with p-mean welfare objectives, aimed at instances with few
//! surplus goods (`m = n + c` for small `c`).
//!
//! All arithmetic is exact: valuations are arbitrary-precision rationals, and
//! fractional welfare exponents are handled by [`radical::RootSum`], which
//! compares sums of real roots exactly or reports that its precision cap ran out.

pub mod fairness;
pub mod instances;
pub mod io;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod radical;
pub mod solver;
pub mod welfare;

pub use fairness::{is_envy_free, is_fair, is_pareto_optimal, tau, EnvyWitness, FairnessNotion, ParetoStatus};
pub use instances::{
    gen_example_compat, gen_hoarding_family, gen_partition_gadget, gen_private_shared_family, gen_random,
    pad_private_pair, pad_to_surplus, pad_zero_agent, Gadget, GadgetVariant, GenError, PartitionGadgetSpec,
};
pub use io::{parse_allocation, parse_instance, serialize_allocation, serialize_instance, IoError};
pub use model::{
    parse_rational, surplus, validate_allocation, validate_instance, Allocation, Instance, ModelError, Rational,
};
pub use oracle::{
    brute_opt, enumerate_allocations, exists_fair_po, price_of_fairness, AllocationTable, Filter, Optimum, PriceReport,
    RatioTag,
};
pub use solver::{
    decide_compatibility, enumerate_heavy_parts, global_optimum, optimize_within_fair, solve_nmu, Compatibility,
    HeavyPart, SolveStatus, SolverConfig, SolverError, SolverResult,
};
pub use welfare::{compare, pmean_value, score_key, utilities, EgalitarianOrder, PExponent, ScoreKey, WelfareOptions};
