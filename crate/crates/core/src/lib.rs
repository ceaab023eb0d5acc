//! Addition trees that minimise the worst-case roundoff error of a
//! floating-point sum.
//!
//! Under the standard model each addition `fl(a + b) = (a + b)(1 + d)` with
//! `|d| <= alpha`, and the error of a tree is at most `alpha` times its
//! cost, the sum of the magnitudes of its internal node values. The crate
//! builds low-cost trees ([`planner`]), computes exact optima for small
//! inputs ([`oracle`]), generates hard instances ([`hardness`]) and checks
//! bounds against a simulated binary floating-point unit ([`fpsim`]).
//!
//! ```
//! use sumtree::{parse_values, plan, PlanOptions, Strategy};
//!
//! let xs = parse_values("1\n2\n3\n4\n").unwrap();
//! let report = plan(&xs, Strategy::Huffman, &PlanOptions::default()).unwrap();
//! assert_eq!(report.cost.to_string(), "19");
//! assert_eq!(sumtree::tree::serialize(&report.tree), "(4 (3 (1 2)))");
//! ```

pub mod error;
pub mod fpsim;
pub mod hardness;
pub mod huffman;
pub mod io;
pub mod matching;
pub mod numeric;
pub mod oracle;
pub mod planner;
pub mod tree;

pub use error::{Error, Result};
pub use fpsim::{simulate, Precision, SimulationReport};
pub use hardness::{reduce_to_addition_tree, ThreePartitionInstance};
pub use huffman::{build_huffman, build_huffman_sorted};
pub use io::parse_values;
pub use matching::{critical_matching, minimum_critical_matching, CriticalMatching};
pub use numeric::{parse_value, ErrorModel, Value};
pub use oracle::{optimal_cost_dp, OptimalResult};
pub use planner::{plan, PlanOptions, PlanReport, Strategy};
pub use tree::{cost, AdditionTree};
