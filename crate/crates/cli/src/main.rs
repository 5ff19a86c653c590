use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use juliashape::pipeline::{self, RunConfig};
use juliashape::Error;

/// Polynomials whose filled Julia sets approximate a union of Jordan domains.
#[derive(Parser, Debug)]
#[command(name = "juliashape", version)]
struct Cli {
    /// Worker threads for grid classification (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a shape document for self-intersections, overlaps and nesting.
    Validate {
        #[arg(long)]
        shape: PathBuf,
    },
    /// Compute the Robin constant, capacity and per-curve harmonic masses.
    Solve(RunArgs),
    /// Write the roots and scale of P_{n,δ}.
    Build(RunArgs),
    /// Render E and K(P) and report the Hausdorff distances.
    Render(RunArgs),
    /// Scan δ and n and tabulate the distances.
    Study(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    shape: PathBuf,
    /// JSON file with any RunConfig fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    /// Quadrature nodes per curve (even, at least 16).
    #[arg(long)]
    nodes: Option<usize>,
    /// Pixel grid, e.g. 512x512.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<[usize; 2]>,
    /// x0,y0,x1,y1 in the shape's coordinates.
    #[arg(long, value_parser = parse_viewport, allow_hyphen_values = true)]
    viewport: Option<[f64; 4]>,
    #[arg(long)]
    max_iter: Option<u32>,
    /// Comma-separated δ values for `study`.
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    /// Comma-separated degrees for `study`.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// `study` fails unless some pair has all three distances below this.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Also write an iteration-shaded julia.ppm.
    #[arg(long)]
    ppm: bool,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn config(&self) -> juliashape::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.delta {
            c.delta = v;
        }
        if let Some(v) = self.nodes {
            c.nodes = v;
        }
        if let Some(v) = self.grid {
            c.grid = v;
        }
        if let Some(v) = self.viewport {
            c.viewport = Some(v);
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        if let Some(v) = &self.deltas {
            c.deltas = v.clone();
        }
        if let Some(v) = &self.ns {
            c.ns = v.clone();
        }
        if self.epsilon.is_some() {
            c.epsilon = self.epsilon;
        }
        c.ppm |= self.ppm;
        Ok(c)
    }
}

fn parse_grid(s: &str) -> Result<[usize; 2], String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let w = w.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let h = h.trim().parse::<usize>().map_err(|e| e.to_string())?;
    Ok([w, h])
}

fn parse_viewport(s: &str) -> Result<[f64; 4], String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into().map_err(|_| "expected x0,y0,x1,y1".to_string())
}

fn run(cli: Cli) -> juliashape::Result<()> {
    match cli.command {
        Command::Validate { shape } => {
            let s = pipeline::cmd_validate(&shape)?;
            println!("{}: valid, {} curve(s)", shape.display(), s.len());
        }
        Command::Solve(args) => {
            let config = args.config()?;
            let summary = pipeline::cmd_solve(&args.shape, &config, Some(&args.out))?;
            print!("{}", summary.to_text());
        }
        Command::Build(args) => {
            let config = args.config()?;
            let poly = pipeline::cmd_build(&args.shape, &config, &args.out)?;
            print!("{}", poly.conjugated_output());
            println!("escape radius {}", poly.escape_radius());
        }
        Command::Render(args) => {
            let config = args.config()?;
            let report = pipeline::cmd_render(&args.shape, &config, &args.out)?;
            let d = &report.distances;
            let show = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.6}"));
            println!("n {} delta {} max_iter {}", d.n, d.delta, d.max_iter);
            println!("d_filled {}", show(d.d_filled));
            println!("d_boundary {}", show(d.d_boundary));
            println!("d_complement_chordal {:.6}", d.d_complement_chordal);
            if !d.viewport_contains_escape_disk {
                eprintln!(
                    "note: viewport does not contain the escape disk of radius {}",
                    d.escape_radius
                );
            }
        }
        Command::Study(args) => {
            let config = args.config()?;
            let outcome = pipeline::cmd_study(&args.shape, &config, &args.out)?;
            print!("{}", pipeline::study_csv(&outcome.study));
            if let Some(i) = outcome.first_below_epsilon {
                let r = &outcome.study.reports[i];
                println!("first below epsilon: delta {} n {}", r.delta, r.n);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::InvalidShape(violations) = &e {
                for v in violations {
                    eprintln!("  {v}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
