use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use arcad_core::airframe::{hover_feasible_with_gravity, validate_airframe};
use arcad_core::analysis::{
    acceleration_set, cross_section, lateral_force_radius, omni_radius, wrench_set, Polytope, WrenchComponent,
};
use arcad_core::exec::Mode;
use arcad_core::nalgebra::Vector3;
use arcad_core::scenario::{
    channel_metrics, export_csv, export_polytope, export_section_svg, load_scenario, metrics_csv, metrics_table,
    parse_airframe_unvalidated, render_plots_with_band, run_batch, run_scenario, write_atomic, ScenarioSpec,
};
use arcad_core::{Error, Result, GRAVITY};

#[derive(Parser)]
#[command(name = "arcad", version, about = "Multirotor design, simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetKind {
    Force,
    Moment,
    Accel,
}

impl SetKind {
    fn name(self) -> &'static str {
        match self {
            SetKind::Force => "force",
            SetKind::Moment => "moment",
            SetKind::Accel => "accel",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse an airframe file and report every invariant violation.
    Validate {
        #[arg(long)]
        aircraft: PathBuf,
    },
    /// Compute wrench-set polytopes and capability metrics.
    Analyze {
        #[arg(long)]
        aircraft: PathBuf,
        /// Set to compute; all three when omitted.
        #[arg(long, value_enum)]
        set: Option<SetKind>,
        /// Cross-section plane, e.g. `z=-19.62`.
        #[arg(long, value_parser = parse_section)]
        section: Option<(usize, f64)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario and write its signal log.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated channels to plot.
        #[arg(long, value_delimiter = ',')]
        plot: Vec<String>,
    },
    /// Run a scenario and report step-response metrics for one signal.
    Response {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        signal: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several scenarios in parallel and write one log per scenario.
    Batch {
        #[arg(long, num_args = 1.., required = true)]
        scenario: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Run the scenarios one after another.
        #[arg(long)]
        sequential: bool,
    },
}

fn parse_section(s: &str) -> std::result::Result<(usize, f64), String> {
    let (axis, value) = s.split_once('=').ok_or("expected AXIS=VALUE, e.g. z=-19.62")?;
    let axis = match axis.trim() {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        other => return Err(format!("unknown axis `{other}` (expected x, y or z)")),
    };
    let value = value.trim().parse::<f64>().map_err(|e| format!("bad offset: {e}"))?;
    Ok((axis, value))
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; 2 is reserved for divergence here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Validate { aircraft } => validate(&aircraft),
        Command::Analyze {
            aircraft,
            set,
            section,
            out,
        } => analyze(&aircraft, set, section, &out),
        Command::Simulate { scenario, out, plot } => simulate(&scenario, &out, &plot),
        Command::Response { scenario, signal, out } => response(&scenario, &signal, &out),
        Command::Batch {
            scenario,
            out,
            sequential,
        } => batch(&scenario, &out, sequential),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

fn validate(path: &Path) -> Result<()> {
    let model = parse_airframe_unvalidated(&read(path)?).map_err(|e| with_path(e, path))?;
    let violations = validate_airframe(&model);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let b = model.allocation();
    let hover = hover_feasible_with_gravity(&model, &b, GRAVITY);
    println!("{}: valid", path.display());
    println!("  {:<18}{}", "rotors", model.rotor_count());
    println!("  {:<18}{}", "allocation rank", b.rank());
    if let Some(u) = hover.hover_thrusts {
        let list: Vec<String> = u.iter().map(|t| format!("{t:.4}")).collect();
        println!("  {:<18}[{}] N", "hover thrusts", list.join(", "));
    }
    Ok(())
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    }
}

fn analyze(path: &Path, set: Option<SetKind>, section: Option<(usize, f64)>, out: &Path) -> Result<()> {
    let model = arcad_core::scenario::load_airframe(path)?;
    create_dir(out)?;
    let b = model.allocation();
    let limits = model.thrust_limits();
    let kinds = match set {
        Some(k) => vec![k],
        None => vec![SetKind::Force, SetKind::Moment, SetKind::Accel],
    };
    let force = wrench_set(&b, &limits, WrenchComponent::Force)?;
    let mut text = String::new();
    let mut csv = String::from("set,affine_dimension,vertices,facets,volume,metric,value\n");
    for kind in kinds {
        let poly: Polytope = match kind {
            SetKind::Force => force.clone(),
            SetKind::Moment => wrench_set(&b, &limits, WrenchComponent::Moment)?,
            SetKind::Accel => acceleration_set(&force, model.mass, GRAVITY),
        };
        let name = kind.name();
        export_polytope(&poly, &out.join(format!("{name}_set.off")))?;
        let (metric, value) = match kind {
            SetKind::Force => (
                "lateral_force_radius_N",
                lateral_force_radius(&force, model.mass, GRAVITY),
            ),
            SetKind::Moment => ("min_facet_offset_Nm", min_offset(&poly)),
            SetKind::Accel => ("omni_radius_m_s2", omni_radius(&poly)),
        };
        let _ = writeln!(text, "{name} set");
        let _ = writeln!(text, "  {:<24}{}", "affine_dimension", poly.affine_dimension);
        let _ = writeln!(text, "  {:<24}{}", "vertices", poly.vertices.len());
        let _ = writeln!(text, "  {:<24}{}", "facets", poly.facets.len());
        let _ = writeln!(text, "  {:<24}{:.6}", "volume", poly.volume());
        let _ = writeln!(text, "  {:<24}{:.6}", metric, value);
        let _ = writeln!(
            csv,
            "{name},{},{},{},{:?},{metric},{value:?}",
            poly.affine_dimension,
            poly.vertices.len(),
            poly.facets.len(),
            poly.volume()
        );
        if let Some((axis, offset)) = section {
            let mut n = Vector3::zeros();
            n[axis] = 1.0;
            let axis_name = ["x", "y", "z"][axis];
            match cross_section(&poly, &n, offset) {
                Ok(cs) => {
                    let file = out.join(format!("{name}_section_{axis_name}{offset}.svg"));
                    export_section_svg(&cs, &format!("{name} set, {axis_name} = {offset}"), &file)?;
                    let _ = writeln!(
                        text,
                        "  {:<24}{:.6}",
                        format!("section {axis_name}={offset} area"),
                        cs.area()
                    );
                }
                Err(Error::DegeneratePolytope(d)) => {
                    let _ = writeln!(text, "  section skipped: set has affine dimension {d}");
                }
                Err(e) => return Err(e),
            }
        }
    }
    print!("{text}");
    write_atomic(&out.join("analysis.txt"), text.as_bytes())?;
    write_atomic(&out.join("analysis.csv"), csv.as_bytes())
}

fn min_offset(p: &Polytope) -> f64 {
    if p.affine_dimension < 3 {
        return 0.0;
    }
    p.facets.iter().map(|h| h.offset).fold(f64::INFINITY, f64::min).max(0.0)
}

fn stem(spec: &ScenarioSpec) -> String {
    spec.name.clone().unwrap_or_else(|| "scenario".into())
}

fn load(path: &Path) -> Result<ScenarioSpec> {
    let spec = load_scenario(path)?;
    for p in &spec.provenance {
        eprintln!("default: {p}");
    }
    Ok(spec)
}

/// Rejects unknown channel names and makes sure every requested channel,
/// and the setpoint it is compared against, ends up in the log.
fn require_logged(spec: &mut ScenarioSpec, channels: &[&str]) -> Result<()> {
    let catalogue = arcad_core::scenario::channel_catalogue(spec.airframe.rotor_count());
    for c in channels {
        if !catalogue.iter().any(|k| k == c) {
            return Err(arcad_core::scenario::unknown_channel(c, &catalogue));
        }
    }
    for c in channels {
        let name = c.to_string();
        for wanted in std::iter::once(name.clone()).chain(arcad_core::scenario::setpoint_for(&name)) {
            if !spec.log_channels.contains(&wanted) {
                spec.log_channels.push(wanted);
            }
        }
    }
    Ok(())
}

fn simulate(path: &Path, out: &Path, plot: &[String]) -> Result<()> {
    let mut spec = load(path)?;
    let channels: Vec<&str> = plot.iter().map(|s| s.trim()).collect();
    require_logged(&mut spec, &channels)?;
    create_dir(out)?;
    let log = run_scenario(&spec)?;
    let name = stem(&spec);
    let csv = out.join(format!("{name}.csv"));
    export_csv(&log, &csv)?;
    println!(
        "wrote {} ({} samples, {} channels)",
        csv.display(),
        log.len(),
        log.names().len()
    );
    if !channels.is_empty() {
        let svg = out.join(format!("{name}.svg"));
        render_plots_with_band(&log, &channels, spec.settling_band, &svg)?;
        println!("wrote {}", svg.display());
        let mut found = Vec::new();
        for c in &channels {
            found.extend(channel_metrics(&log, c, spec.settling_band)?);
        }
        if !found.is_empty() {
            print!("{}", metrics_table(&found, log.dt));
            write_atomic(
                &out.join(format!("{name}_metrics.csv")),
                metrics_csv(&found, log.dt).as_bytes(),
            )?;
        }
    }
    Ok(())
}

fn response(path: &Path, signal: &str, out: &Path) -> Result<()> {
    let mut spec = load(path)?;
    require_logged(&mut spec, &[signal])?;
    if arcad_core::scenario::setpoint_for(signal).is_none() {
        return Err(Error::InvalidInput(format!(
            "`{signal}` has no setpoint channel to measure a response against"
        )));
    }
    create_dir(out)?;
    let log = run_scenario(&spec)?;
    let metrics = channel_metrics(&log, signal, spec.settling_band)?
        .ok_or_else(|| Error::InvalidInput(format!("no single step found in the setpoint of `{signal}`")))?;
    let items = [metrics];
    print!("{}", metrics_table(&items, log.dt));
    let base = signal.replace('.', "_");
    write_atomic(
        &out.join(format!("{base}_metrics.txt")),
        metrics_table(&items, log.dt).as_bytes(),
    )?;
    write_atomic(
        &out.join(format!("{base}_metrics.csv")),
        metrics_csv(&items, log.dt).as_bytes(),
    )?;
    render_plots_with_band(
        &log,
        &[signal],
        spec.settling_band,
        &out.join(format!("{base}_response.svg")),
    )
}

fn batch(paths: &[PathBuf], out: &Path, sequential: bool) -> Result<()> {
    let specs = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    create_dir(out)?;
    let mode = if sequential {
        Mode::Sequential
    } else {
        Mode::available()
    };
    let mut first_err = None;
    for (spec, result) in specs.iter().zip(run_batch(&specs, mode)) {
        let name = stem(spec);
        match result {
            Ok(log) => {
                let csv = out.join(format!("{name}.csv"));
                export_csv(&log, &csv)?;
                println!("{name}: wrote {}", csv.display());
            }
            Err(e) => {
                eprintln!("{name}: {e}");
                // divergence outranks other failures for the exit code
                if first_err.as_ref().is_none_or(|f: &Error| f.exit_code() < e.exit_code()) {
                    first_err = Some(e);
                }
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}
