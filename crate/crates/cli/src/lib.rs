//! Command-line front end for `conetri-core`: parse cones, run the pipeline,
//! and emit triangulations, traces and certificate reports.

pub mod error;
pub mod input;
pub mod random;
pub mod report;
pub mod run;

pub use error::{CliError, Result};
pub use input::{parse_input, parse_report_cones, ParsedCone};
pub use random::{campaign_rng, random_cone};
pub use report::{CampaignReport, RunReport, Status};
pub use run::{execute, run_campaign, run_cone, Execution, Format, RandomSpec, RunConfig, RunOptions, Source};
