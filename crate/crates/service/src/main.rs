use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use framedx_core::bayes::DEFAULT_EPSILON;
use framedx_core::evaluation::ACCEPTANCE_LEVEL;
use framedx_core::DiagnosisOptions;
use framedx_service::cli::{self, Output, DEFAULT_CRITICALS};
use framedx_service::session::SessionManager;
use framedx_service::store::CaseStore;

#[derive(Parser)]
#[command(name = "framedx", version, about = "Frame-based differential diagnosis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knowledge base maintenance
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Diagnose one case file or every *.json case in a directory
    Diagnose {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        case: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        json: bool,
    },
    /// Compare software outcomes with expert diagnoses
    Evaluate {
        #[arg(long)]
        pairs: PathBuf,
        /// Contingency tables to use instead of the pairs' ages
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Chi-square critical value; repeatable
        #[arg(long = "critical")]
        criticals: Vec<f64>,
        #[arg(long, default_value_t = ACCEPTANCE_LEVEL)]
        threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run the consultation HTTP service
    Serve {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Re-diagnose stored cases and check them against their records
    Replay {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        store: PathBuf,
    },
}

#[derive(Subcommand)]
enum KbCommand {
    /// Check a knowledge base document against every invariant
    Validate {
        path: PathBuf,
        /// Also warn about catalog values no disease uses
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
    },
}

fn emit(out: Output) -> ! {
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code)
}

fn serve(kb: PathBuf, port: u16, store: PathBuf, host: String, epsilon: f64) -> anyhow::Result<()> {
    let kb = cli::load_kb_file(&kb).map_err(|o| anyhow::anyhow!(o.stderr.trim().to_string()))?;
    let store = CaseStore::open(&store).context("opening case store")?;
    let manager = Arc::new(SessionManager::new(Arc::new(kb), store, DiagnosisOptions { epsilon }));
    let addr: SocketAddr = format!("{host}:{port}").parse().context("listen address")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, framedx_service::http::router(manager)).await?;
        Ok(())
    })
}

fn main() {
    let args = Cli::parse();
    let out = match args.command {
        Command::Kb { command: KbCommand::Validate { path, strict, json } } => cli::kb_validate(&path, strict, json),
        Command::Diagnose { kb, case, epsilon, json } => cli::diagnose_cases(&kb, &case, epsilon, json),
        Command::Evaluate { pairs, tables, criticals, threshold, json } => {
            let criticals = if criticals.is_empty() { DEFAULT_CRITICALS.to_vec() } else { criticals };
            cli::evaluate(&pairs, tables.as_deref(), &criticals, threshold, json)
        }
        Command::Replay { kb, store } => cli::replay(&kb, &store),
        Command::Serve { kb, port, store, host, epsilon } => match serve(kb, port, store, host, epsilon) {
            Ok(()) => Output::default(),
            Err(e) => Output { code: 1, stdout: String::new(), stderr: format!("error: {e:#}\n") },
        },
    };
    emit(out)
}
