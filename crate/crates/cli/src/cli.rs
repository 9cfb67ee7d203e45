//! Command-line grammar.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use gurarii_core::rational::parse_rational;
use gurarii_core::Rational;

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a rational of the form p/q"))
}

#[derive(Debug, Parser)]
#[command(name = "gurarii", version, about = "Exact constructions on polyhedral normed spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a space file describes a symmetric, bounded unit ball.
    SpaceValidate { space: PathBuf },
    /// Amalgamate an ε-isometry X -> Y into isometric embeddings of X and Y.
    Amalgamate {
        x: PathBuf,
        y: PathBuf,
        map: PathBuf,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long)]
        out: PathBuf,
    },
    /// Back-and-forth between two chain directories from a seed map.
    BackAndForth {
        e: PathBuf,
        f: PathBuf,
        map: PathBuf,
        #[arg(long = "target-eps", value_parser = rational)]
        target_eps: Rational,
        #[arg(long, value_parser = rational, default_value = "1/4")]
        ratio: Rational,
        /// First tolerance; chosen from the seed defect when omitted.
        #[arg(long, value_parser = rational)]
        eps0: Option<Rational>,
        #[arg(long, default_value_t = gurarii_core::engine::DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed the union of a chain into a growing Gurarii chain.
    Embed {
        x: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check every certificate of a trace file.
    Verify { trace: PathBuf },
    /// Draw a 2-dimensional unit ball as SVG.
    Render {
        space: PathBuf,
        svg: PathBuf,
        /// Pixels per unit.
        #[arg(long, default_value_t = 100)]
        scale: u32,
    },
    /// Write a random symmetric space file.
    RandomSpace {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        /// Largest number of vertex pairs.
        #[arg(long, default_value_t = 4)]
        pairs: usize,
        #[arg(long, default_value = "X")]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SpaceValidate { .. } => "space-validate",
            Command::Amalgamate { .. } => "amalgamate",
            Command::BackAndForth { .. } => "back-and-forth",
            Command::Embed { .. } => "embed",
            Command::Verify { .. } => "verify",
            Command::Render { .. } => "render",
            Command::RandomSpace { .. } => "random-space",
        }
    }
}
