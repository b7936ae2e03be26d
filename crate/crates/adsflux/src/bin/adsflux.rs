//! Scenario runner: verification suites, convergence scans, and one-off
//! geometry queries over the library, with machine-readable JSON/CSV output.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or a
//! numerical computation errors out, 2 on configuration or usage errors.
//! Reports are byte-identical for a fixed configuration and seed; wall time
//! goes to stderr only.

use adsflux::config::{ConfigError, ScenarioConfig};
use adsflux::frame::{project, FramePoint};
use adsflux::holonomy::anchored_holonomy;
use adsflux::isotopy::{closed_form_isotopy, flux, hamiltonian_isotopy, Hamiltonian, IsotopyPath};
use adsflux::lie::{AlgVec, GroupElt, Mat2};
use adsflux::mesh::{serialize_mesh, SurfaceMesh};
use adsflux::rep::RepPair;
use adsflux::report::Report;
use adsflux::suite::{run_scan_curvature, run_scan_flux_holonomy, run_verify};
use adsflux::surface::EquivMap;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::rc::Rc;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "adsflux", version, about = "Verification suites and geometry queries for equivariant Lagrangians in H²×H²")]
struct Cli {
    /// Scenario configuration (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for all randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory for reports and tables; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Uniform multiplier on every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification suite and write a JSON report.
    Verify,
    /// Run a convergence scan and write a JSON report plus a CSV table.
    Scan {
        #[command(subcommand)]
        which: Scan,
    },
    /// Project a frame point (base matrix and body velocity) to H²×H².
    Project {
        /// Row-major entries a b c d of the base matrix, then the
        /// body-velocity coordinates in the (J, K, K') basis.
        #[arg(allow_hyphen_values = true, num_args = 7, required = true, value_name = "A B C D J K KP")]
        frame: Vec<f64>,
    },
    /// Flux of the configured family against each configured loop word.
    Flux,
    /// Anchored holonomy of the configured family's end map per loop word.
    Holonomy,
    /// Write the configured surface mesh in the plain-text format.
    MeshExport,
}

#[derive(Subcommand)]
enum Scan {
    /// Loop defect over symplectic area on shrinking squares.
    Curvature,
    /// Flux versus holonomy across family durations.
    FluxHolonomy,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, ConfigError> {
    match &cli.config {
        Some(path) => ScenarioConfig::load(path),
        None => Ok(ScenarioConfig::default()),
    }
}

fn emit(cli: &Cli, filename: &str, content: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(filename), content)
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn finish_report(cli: &Cli, filename: &str, report: &Report) -> ExitCode {
    if emit(cli, filename, &report.render()).is_err() {
        eprintln!("adsflux: cannot write {filename}");
        return ExitCode::from(2);
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Build the configured isotopy family, anchored at the graph of the
/// representation's conjugator.
fn build_family(cfg: &ScenarioConfig, rep: &RepPair) -> Result<IsotopyPath, String> {
    match cfg.family {
        adsflux::config::FamilySpec::Harmonic { periods, duration } => {
            let mesh = Rc::new(SurfaceMesh::build(cfg.mesh.rings, cfg.mesh.boundary));
            let form = mesh
                .harmonic_one_form(periods)
                .map_err(|e| e.to_string())?;
            closed_form_isotopy(rep, mesh, Rc::new(form), duration).map_err(|e| e.to_string())
        }
        adsflux::config::FamilySpec::Hamiltonian { amplitude, width, duration } => {
            let beta = rep.beta().ok_or("family needs a diagonal or conjugate class")?;
            hamiltonian_isotopy(
                rep,
                Hamiltonian::Bump { amplitude, width },
                duration,
                EquivMap::graph_of_isometry(beta),
                cfg.controls.ode_step,
            )
            .map_err(|e| e.to_string())
        }
    }
}

fn run(cli: &Cli) -> ExitCode {
    let cfg = match load_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("adsflux: {e}");
            return ExitCode::from(2);
        }
    };
    match &cli.command {
        Command::Verify => {
            let report = run_verify(&cfg, cli.seed, cli.tol_scale);
            finish_report(cli, "verify.json", &report)
        }
        Command::Scan { which } => {
            let (name, (report, csv)) = match which {
                Scan::Curvature => {
                    ("curvature", run_scan_curvature(&cfg, cli.seed, cli.tol_scale))
                }
                Scan::FluxHolonomy => (
                    "flux-holonomy",
                    run_scan_flux_holonomy(&cfg, cli.seed, cli.tol_scale),
                ),
            };
            if emit(cli, &format!("scan-{name}.csv"), &csv).is_err() {
                eprintln!("adsflux: cannot write scan CSV");
                return ExitCode::from(2);
            }
            finish_report(cli, &format!("scan-{name}.json"), &report)
        }
        Command::Project { frame } => {
            let m = Mat2::new(frame[0], frame[1], frame[2], frame[3]);
            if m.determinant().abs() < 1e-12 {
                eprintln!("adsflux: base matrix must be invertible");
                return ExitCode::from(2);
            }
            let u = AlgVec::from_coords([frame[4], frame[5], frame[6]]);
            if (adsflux::lie::pairing(u, u) + 1.0).abs() > 1e-9 || !u.is_future() {
                eprintln!("adsflux: velocity must be unit future timelike in (J, K, K')");
                return ExitCode::from(2);
            }
            let f = FramePoint::new(GroupElt::new(m), u);
            match project(&f) {
                Ok(b) => {
                    let text = format!(
                        "{{\n  \"left\": [{:.17e}, {:.17e}],\n  \"right\": [{:.17e}, {:.17e}]\n}}\n",
                        b.left.x, b.left.y, b.right.x, b.right.y
                    );
                    if emit(cli, "project.json", &text).is_err() {
                        return ExitCode::from(2);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("adsflux: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Flux | Command::Holonomy => {
            let rep = cfg.build_rep();
            let path = match build_family(&cfg, &rep) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("adsflux: {e}");
                    return ExitCode::from(1);
                }
            };
            let mut lines = Vec::new();
            for word in cfg.loop_words() {
                let value = match &cli.command {
                    Command::Flux => flux(&path, &rep, &word),
                    _ => anchored_holonomy(&rep, &path.end(), &word),
                };
                match value {
                    Ok(v) => lines.push(format!("  \"{}\": {:.17e}", word.name(), v)),
                    Err(e) => {
                        eprintln!("adsflux: loop {}: {e}", word.name());
                        return ExitCode::from(1);
                    }
                }
            }
            let (label, file) = match &cli.command {
                Command::Flux => ("flux", "flux.json"),
                _ => ("holonomy", "holonomy.json"),
            };
            let text = format!("{{\n  \"kind\": \"{label}\",\n{}\n}}\n", lines.join(",\n"));
            if emit(cli, file, &text).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Command::MeshExport => {
            let mesh = SurfaceMesh::build(cfg.mesh.rings, cfg.mesh.boundary);
            if emit(cli, "mesh.txt", &serialize_mesh(&mesh)).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = run(&cli);
    eprintln!("wall time: {:.3} s", started.elapsed().as_secs_f64());
    code
}
