//! Synthetic house dataset, scenario suite, request frames and benchmarks.

pub mod bench;
pub mod frames;
pub mod house;
pub mod scenarios;

pub use bench::{linear_fit, run_bench, BenchConfig, BenchReport, BenchRow, LinearFit, Sweep};
pub use frames::{decide_frame, read_frames, write_decisions, write_frames, Frame, FrameDecisions, FrameError};
pub use house::{generate_house, house_registry, house_spaces, HouseDataset, HOUSE_POLICIES};
pub use scenarios::{run_scenarios, ScenarioResult};
