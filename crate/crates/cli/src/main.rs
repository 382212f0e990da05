//! `humanedit`: batch front end over humanedit-core.
//!
//! Exit status: 0 success, 2 argument error, 3 data error, 4 I/O error.

mod commands;
mod fixtures;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use humanedit_core::Error;

#[derive(Parser)]
#[command(name = "humanedit", version, about = "Pose-guided human editing toolkit")]
struct Cli {
    /// Print errors as `{"error": {"code", "message"}}` on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repose source pixels onto a target DensePose map.
    WarpDense(commands::WarpDense),
    /// Fit a garment onto a body with a landmark homography.
    WarpSparse(commands::WarpSparse),
    /// Blank the source and target pose boxes of an image.
    BgExtract(commands::BgExtract),
    /// Rasterize a keypoint skeleton or a DensePose map.
    RenderPose(commands::RenderPose),
    /// Pack texture, pose and background into a 9-channel tensor file.
    Pack(commands::Pack),
    /// Split a packed tensor back into its three images.
    Unpack(commands::Unpack),
    /// Fill the garment region of an image.
    RemoveGarment(commands::RemoveGarment),
    /// Randomly re-orient each labelled part.
    Augment(commands::Augment),
    /// Cross-attention over tensor-file matrices.
    Attn(commands::Attn),
    /// Evaluate the training losses and print the breakdown as JSON.
    Loss(commands::Loss),
    /// Filter a JSONL annotation manifest.
    Curate(commands::Curate),
    /// Write a deterministic set of sample inputs.
    MakeFixtures(fixtures::MakeFixtures),
}

/// Failure of a subcommand.
#[derive(Debug)]
pub enum CliError {
    /// Inconsistent flags that clap cannot express.
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "ArgumentError",
            CliError::Core(e) => e.code(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_io() => 4,
            CliError::Core(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

fn report(json: bool, code: &str, message: &str) {
    if json {
        let v = serde_json::json!({ "error": { "code": code, "message": message } });
        eprintln!("{v}");
    } else {
        eprintln!("error: {message}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                // --help / --version
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if std::env::args().any(|a| a == "--json-errors") {
                report(true, "ArgumentError", e.to_string().trim());
                return ExitCode::from(2);
            }
            e.exit();
        }
    };
    let result = match cli.command {
        Command::WarpDense(a) => a.run(),
        Command::WarpSparse(a) => a.run(),
        Command::BgExtract(a) => a.run(),
        Command::RenderPose(a) => a.run(),
        Command::Pack(a) => a.run(),
        Command::Unpack(a) => a.run(),
        Command::RemoveGarment(a) => a.run(),
        Command::Augment(a) => a.run(),
        Command::Attn(a) => a.run(),
        Command::Loss(a) => a.run(),
        Command::Curate(a) => a.run(),
        Command::MakeFixtures(a) => a.run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(cli.json_errors, e.code(), &e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
