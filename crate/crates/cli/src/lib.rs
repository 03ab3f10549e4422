//! Batch front-end for `dunkl-liyau`: grid suites that emit one row per
//! checked claim and exit nonzero on any violation.
//!
//! Exit codes: `0` every row passed, `1` some row failed, `2` invalid
//! configuration or I/O failure, `3` numerical failure (convergence,
//! overflow) at the grid point named on stderr.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod corpus;
pub mod output;
pub mod suites;

use std::io;

use args::{Cli, Command, OutputArgs};
use output::{KernelRow, Row, Sink, SummaryRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure at {context}: {source}")]
    Numeric {
        source: dunkl_liyau::Error,
        context: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric {
                source:
                    dunkl_liyau::Error::Convergence { .. }
                    | dunkl_liyau::Error::Overflow(_)
                    | dunkl_liyau::Error::Field(_),
                ..
            } => 3,
            _ => 2,
        }
    }
}

/// Rows written and rows that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub rows: usize,
    pub failures: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            0
        } else {
            1
        }
    }
}

fn output_args(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::KernelEval(a) => &a.common.output,
        Command::LiyauScan(a) | Command::ClaimsVerify(a) => &a.output,
        Command::SolutionScan(a) => &a.common.output,
        Command::HarnackScan(a) => &a.common.output,
        Command::SemigroupCheck(a) => &a.common.output,
        Command::Report(a) => &a.output,
    }
}

/// Run one command, writing to the sink its flags select.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let sink = Sink::open(output_args(&cli.command))?;
    run_with(cli, sink)
}

/// Run one command into an explicit sink.
pub fn run_with(cli: &Cli, mut sink: Sink) -> Result<Outcome, CliError> {
    let result = match &cli.command {
        Command::KernelEval(a) => suites::kernel_eval(a, &mut sink),
        Command::LiyauScan(a) => suites::liyau(a, &mut sink),
        Command::SolutionScan(a) => suites::solution(a, &mut sink),
        Command::HarnackScan(a) => suites::harnack(a, &mut sink),
        Command::SemigroupCheck(a) => suites::semigroup(a, &mut sink),
        Command::ClaimsVerify(a) => suites::claims(a, &mut sink),
        Command::Report(a) => suites::report(a, &mut sink),
    };
    let failures = sink.failures;
    let (rows, _) = match &cli.command {
        Command::KernelEval(_) => sink.finish::<KernelRow>()?,
        Command::Report(_) => sink.finish::<SummaryRow>()?,
        _ => sink.finish::<Row>()?,
    };
    result?;
    Ok(Outcome { rows, failures })
}
