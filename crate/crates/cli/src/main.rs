use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sketchrec::segmentation::{trace_stroke, SegmentationTrace};
use sketchrec::stroke_model::{export_tables, segment_table, write_tables, TableFile};
use sketchrec::{parse_document, MergeConfig, SketchDocument, SmoothingConfig};
use sketchrec_cli::{domains_of, load_library, recognize_document, router, to_json, to_text};

#[derive(Parser)]
#[command(name = "sketchrec", version, about = "Recognize line-based figures in sketches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment every stroke and write its tables.
    Segment {
        file: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        block_size: usize,
        #[arg(long, default_value_t = 5.0)]
        max_deviation: f64,
    },
    /// Recognize every stroke of a sketch.
    Recognize {
        file: PathBuf,
        /// Directory of *.dsl files replacing the builtin library.
        #[arg(long)]
        domains: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Inspect the domain library.
    Domains {
        #[command(subcommand)]
        action: DomainsAction,
    },
    /// Write the four per-stroke tables.
    ExportTables {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        domains: Option<PathBuf>,
        /// Directory of UI assets to serve.
        #[arg(long = "static")]
        assets: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DomainsAction {
    List {
        #[arg(long)]
        domains: Option<PathBuf>,
    },
}

/// Failure with the exit code to report it with.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(1, e.to_string())
    }
}

fn read_sketch(path: &Path) -> Result<SketchDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| Failure(1, format!("{}: {e}", path.display())))
}

fn traces(
    doc: &SketchDocument,
    smoothing: SmoothingConfig,
    merge: MergeConfig,
) -> Vec<SegmentationTrace> {
    let mut out = Vec::new();
    for stroke in &doc.strokes {
        match trace_stroke(stroke, smoothing, merge) {
            Ok(t) => out.push(t),
            Err(e) => eprintln!("stroke {}: skipped: {e}", stroke.id),
        }
    }
    out
}

fn table_files(traces: &[SegmentationTrace]) -> Result<Vec<TableFile>, Failure> {
    let doc = SketchDocument::new(traces.iter().map(|t| t.stroke.clone()).collect());
    let cats: Vec<_> = traces.iter().map(|t| t.categories.clone()).collect();
    let smoothed: Vec<_> = traces.iter().map(|t| t.smoothed.clone()).collect();
    let raw: Vec<_> = traces.iter().map(|t| t.raw.clone()).collect();
    Ok(export_tables(&doc, &cats, &smoothed, &raw)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Segment {
            file,
            output,
            block_size,
            max_deviation,
        } => {
            let doc = read_sketch(&file)?;
            let traces = traces(
                &doc,
                SmoothingConfig { block_size },
                MergeConfig { max_deviation },
            );
            let mut files = table_files(&traces)?;
            for t in &traces {
                files.push(TableFile {
                    name: format!("sketch{}segmentmerged.csv", t.stroke.id),
                    contents: segment_table(&t.merged),
                });
            }
            std::fs::create_dir_all(&output)?;
            write_tables(&output, &files)?;
            for t in &traces {
                println!(
                    "stroke {}: {} points, {} segments, {} merged",
                    t.stroke.id,
                    t.stroke.points.len(),
                    t.raw.len(),
                    t.merged.len()
                );
            }
        }
        Command::ExportTables { file, output } => {
            let doc = read_sketch(&file)?;
            let traces = traces(&doc, SmoothingConfig::default(), MergeConfig::default());
            let files = table_files(&traces)?;
            std::fs::create_dir_all(&output)?;
            write_tables(&output, &files)?;
            println!("wrote {} tables to {}", files.len(), output.display());
        }
        Command::Recognize {
            file,
            domains,
            json,
        } => {
            let library = load_library(domains.as_deref())?;
            let doc = read_sketch(&file)?;
            let response = recognize_document(&doc, &library);
            if json {
                print!("{}", to_json(&response));
            } else {
                print!("{}", to_text(&response));
            }
        }
        Command::Domains {
            action: DomainsAction::List { domains },
        } => {
            let library = load_library(domains.as_deref())?;
            for d in domains_of(&library).domains {
                println!("{}: {}", d.name, d.shapes.join(", "));
            }
        }
        Command::Serve {
            port,
            host,
            domains,
            assets,
        } => {
            let library = load_library(domains.as_deref())?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = sketchrec_cli::bind(&format!("{host}:{port}")).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                sketchrec_cli::serve(listener, router(library, assets)).await
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
