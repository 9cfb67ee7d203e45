//! Command implementations. Each returns a report; outputs go to files.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use gurarii_core::amalgam::amalgamate_auto;
use gurarii_core::engine::{back_and_forth, default_eps0, embed_universal, schedule_make};
use gurarii_core::operators::LinearMap;
use gurarii_core::random::{random_space, rng};
use gurarii_core::rational::format_rational;
use gurarii_core::spaces::PolyhedralSpace;
use gurarii_core::trace::{verify_trace, Certificate, Trace};
use gurarii_core::{Error, Rational};

use crate::cli::Command;
use crate::files::{
    check_names, load_chain, load_map, load_space, load_space_file, read_json, sha256_hex, write_json, MapFile,
    SpaceFile,
};
use crate::render::{polygon, render_svg};
use crate::report::RunReport;
use crate::CliError;

/// Runs a command, timing it and writing `report.json` next to its outputs.
pub fn run(command: &Command) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut report = RunReport::new(command.name());
    let out_dir = match command {
        Command::SpaceValidate { space } => {
            space_validate(&mut report, space)?;
            None
        }
        Command::Amalgamate { x, y, map, eps, out } => {
            amalgamate(&mut report, x, y, map, eps, out)?;
            Some(out)
        }
        Command::BackAndForth {
            e,
            f,
            map,
            target_eps,
            ratio,
            eps0,
            depth,
            out,
        } => {
            run_back_and_forth(&mut report, e, f, map, target_eps, ratio, eps0.as_ref(), *depth, out)?;
            Some(out)
        }
        Command::Embed { x, g, depth, out } => {
            embed(&mut report, x, g, *depth, out)?;
            Some(out)
        }
        Command::Verify { trace } => {
            verify(&mut report, trace)?;
            None
        }
        Command::Render { space, svg, scale } => {
            render(&mut report, space, svg, *scale)?;
            None
        }
        Command::RandomSpace {
            seed,
            dim,
            pairs,
            name,
            out,
        } => {
            random(&mut report, *seed, *dim, *pairs, name, out)?;
            None
        }
    };
    report.settle();
    report.duration_ms = start.elapsed().as_millis() as u64;
    if let Some(dir) = out_dir {
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })
}

fn input_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: message.into(),
        position: None,
    }
}

/// Writes an artifact into `dir` and records it under its file name, so
/// reports do not depend on where the output directory lives.
fn emit<T: serde::Serialize>(report: &mut RunReport, dir: &Path, file: &str, value: &T) -> Result<(), CliError> {
    let digest = write_json(&dir.join(file), value)?;
    report.output(Path::new(file), &digest);
    Ok(())
}

fn record_checks(report: &mut RunReport, trace: &Trace) {
    match verify_trace(trace) {
        Ok(checks) => report.checks.extend(checks),
        Err(e) => report.check("trace structure", false, e.to_string()),
    }
}

/// Name of the invariant a failed space construction violates.
fn violated_invariant(e: &Error) -> &'static str {
    match e {
        Error::NotSymmetric => "ball symmetric",
        Error::UnboundedPolytope => "bounded",
        Error::OriginNotInterior => "origin interior",
        Error::Degenerate => "full-dimensional",
        _ => "valid unit ball",
    }
}

fn space_validate(report: &mut RunReport, path: &Path) -> Result<(), CliError> {
    let (file, digest) = load_space_file(path)?;
    report.input(path, &digest);
    report.text("name", &file.name);
    report.text("dimension", file.dimension);
    let poly = file.polytope().map_err(|m| input_error(path, m))?;
    match PolyhedralSpace::from_polytope(&poly) {
        Err(e) => report.check(violated_invariant(&e), false, e.to_string()),
        Ok(space) => {
            for (name, ok) in space.validate().checks {
                report.check(name, ok, "");
            }
            report.text("facets", space.ball_facets().rows.len());
            report.text("vertices", space.ball_vertices().points.len());
            report.text("dual_vertices", space.dual_vertices().points.len());
        }
    }
    Ok(())
}

fn amalgamate(
    report: &mut RunReport,
    x_path: &Path,
    y_path: &Path,
    map_path: &Path,
    eps: &Rational,
    out: &Path,
) -> Result<(), CliError> {
    let x = load_space(x_path)?;
    let y = load_space(y_path)?;
    let (map, digest) = load_map(map_path)?;
    report.input(x_path, &x.sha256);
    report.input(y_path, &y.sha256);
    report.input(map_path, &digest);
    report.flag("eps", format_rational(eps));
    check_names(map_path, &map, &x.file.name, &y.file.name)?;
    if map.basis.is_some() {
        return Err(input_error(map_path, "amalgamate takes a map on the whole domain; remove `basis`"));
    }
    let matrix = map
        .matrix(y.space.dimension(), x.space.dimension())
        .map_err(|m| input_error(map_path, m))?;
    let f = LinearMap::new(x.space.clone(), y.space.clone(), matrix)?;
    let cert = amalgamate_auto(&f, eps)?;

    report.value("epsilon_star", &cert.f_defect.epsilon_star);
    report.value("eps", eps);
    report.value("cutoff", &cert.cutoff);
    report.value("bound_achieved", &cert.bound_achieved);
    report.value("i_defect", &cert.i_defect.epsilon_star);
    report.value("j_defect", &cert.j_defect.epsilon_star);
    report.text("z_dimension", cert.z.dimension());

    let trace = Trace::amalgam(&f, &cert);
    record_checks(report, &trace);

    create_dir(out)?;
    let z_name = "Z";
    emit(report, out, "z.json", &SpaceFile::from_space(z_name, &cert.z))?;
    emit(report, out, "i.json", &MapFile::new(&x.file.name, z_name, cert.i.matrix()))?;
    emit(report, out, "j.json", &MapFile::new(&y.file.name, z_name, cert.j.matrix()))?;
    emit(report, out, "trace.json", &trace)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_back_and_forth(
    report: &mut RunReport,
    e_dir: &Path,
    f_dir: &Path,
    map_path: &Path,
    target: &Rational,
    ratio: &Rational,
    eps0: Option<&Rational>,
    depth: usize,
    out: &Path,
) -> Result<(), CliError> {
    let mut e = load_chain(e_dir)?;
    let mut f = load_chain(f_dir)?;
    let (map, digest) = load_map(map_path)?;
    for (path, hash) in e.hashes.iter().chain(&f.hashes) {
        report.input(path, hash);
    }
    report.input(map_path, &digest);
    report.flag("target_eps", format_rational(target));
    report.flag("ratio", format_rational(ratio));
    report.flag("depth", depth);
    if let Some(q) = eps0 {
        report.flag("eps0", format_rational(q));
    }
    check_names(map_path, &map, &e.names[0], &f.names[0])?;

    let e0 = e.chain.stage(0).clone();
    let f0 = f.chain.stage(0).clone();
    let x_embed = match &map.basis {
        Some(basis) => {
            if basis.iter().any(|b| b.len() != e0.dimension()) {
                return Err(input_error(map_path, "basis vectors must live in the domain space"));
            }
            e0.subspace(basis)?.1
        }
        None => LinearMap::identity(e0.clone()),
    };
    let x = x_embed.domain().clone();
    let matrix = map
        .matrix(f0.dimension(), x.dimension())
        .map_err(|m| input_error(map_path, m))?;
    let seed = LinearMap::new(x, f0, matrix)?;
    let seed_defect = seed.defect()?.epsilon_star;
    let eps0 = eps0.cloned().unwrap_or_else(|| default_eps0(target, &seed_defect));
    let schedule = schedule_make(target, &eps0, ratio, depth)?;

    report.value("seed_defect", &seed_defect);
    report.value("target_eps", target);
    report.value("eps0", &schedule.eps0);
    report.value("ratio", &schedule.ratio);
    report.value("budget_lhs", &schedule.budget_lhs);
    report.value("budget_slack", &schedule.slack);
    report.value("tail_bound", &schedule.tail_bound);

    let run = back_and_forth(&mut e.chain, &mut f.chain, &x_embed, &seed, &schedule)?;
    for (n, step) in run.steps.iter().enumerate() {
        report.value(&format!("step_{n}.drift"), &step.drift);
        report.value(&format!("step_{n}.drift_bound"), &step.drift_bound);
        report.check(
            &format!("step {n} drift"),
            step.drift <= step.drift_bound,
            format!("{} <= {}", format_rational(&step.drift), format_rational(&step.drift_bound)),
        );
    }
    for (k, partial) in run.budget_partials.iter().enumerate() {
        report.value(&format!("budget_partial_{k}"), partial);
    }
    report.value("final_distance", &run.final_distance);
    report.check(
        "final distance below target",
        run.final_distance < *target,
        format!("{} < {}", format_rational(&run.final_distance), format_rational(target)),
    );
    report.text("oracle_stages_e", e.chain.oracle_log().len());
    report.text("oracle_stages_f", f.chain.oracle_log().len());

    let trace = Trace::back_and_forth(&run);
    record_checks(report, &trace);
    create_dir(out)?;
    emit(report, out, "trace.json", &trace)?;
    Ok(())
}

fn embed(report: &mut RunReport, x_dir: &Path, g_dir: &Path, depth: usize, out: &Path) -> Result<(), CliError> {
    let x = load_chain(x_dir)?;
    let mut g = load_chain(g_dir)?;
    for (path, hash) in x.hashes.iter().chain(&g.hashes) {
        report.input(path, hash);
    }
    report.flag("depth", depth);
    let run = embed_universal(&x.chain, &mut g.chain, depth)?;
    for (n, d) in run.defects.iter().enumerate() {
        report.value(&format!("level_{n}.defect"), &d.epsilon_star);
    }
    for (n, step) in run.steps.iter().enumerate() {
        report.value(&format!("step_{n}.drift"), &step.drift);
        report.value(&format!("step_{n}.drift_bound"), &step.drift_bound);
    }
    report.text("oracle_stages", g.chain.oracle_log().len());
    let trace = Trace::embed(&run);
    record_checks(report, &trace);
    create_dir(out)?;
    emit(report, out, "trace.json", &trace)?;
    Ok(())
}

fn verify(report: &mut RunReport, path: &Path) -> Result<(), CliError> {
    let (trace, digest): (Trace, String) = read_json(path)?;
    report.input(path, &digest);
    report.text("kind", trace.kind());
    report.text("spaces", trace.spaces.len());
    match &trace.certificate {
        Certificate::Amalgam(r) => {
            report.value("epsilon_star", &r.f_defect.epsilon_star);
            report.value("bound_achieved", &r.bound_achieved);
        }
        Certificate::BackAndForth(r) => {
            report.value("target_eps", &r.schedule.target_eps);
            report.value("final_distance", &r.final_distance);
        }
        Certificate::Embed(r) => {
            report.text("depth", r.steps.len());
        }
    }
    record_checks(report, &trace);
    Ok(())
}

fn render(report: &mut RunReport, path: &Path, svg: &Path, scale: u32) -> Result<(), CliError> {
    let space = load_space(path)?;
    report.input(path, &space.sha256);
    report.flag("scale", scale);
    let d = space.space.dimension();
    if d != 2 {
        return Err(CliError::Rejected(format!(
            "render draws 2-dimensional balls only; {} has dimension {d} and projecting it is out of scope",
            path.display()
        )));
    }
    let text = render_svg(&space.space, &space.file.name, scale);
    fs::write(svg, &text).map_err(|e| CliError::Output {
        path: svg.to_path_buf(),
        message: e.to_string(),
    })?;
    report.output(svg, &sha256_hex(text.as_bytes()));
    let drawn = polygon(&space.space);
    report.text("polygon_points", drawn.len());
    report.check(
        "every vertex drawn",
        drawn.len() == space.space.ball_vertices().points.len(),
        format!("{} points", drawn.len()),
    );
    Ok(())
}

fn random(report: &mut RunReport, seed: u64, dim: usize, pairs: usize, name: &str, out: &Path) -> Result<(), CliError> {
    report.flag("seed", seed);
    report.flag("dim", dim);
    report.flag("pairs", pairs);
    if !(1..=4).contains(&dim) {
        return Err(CliError::Rejected(format!("--dim must be between 1 and 4, got {dim}")));
    }
    let space = Arc::new(random_space(&mut rng(seed), dim, pairs));
    let file = SpaceFile::from_space(name, &space);
    let digest = write_json(out, &file)?;
    report.output(out, &digest);
    report.text("facets", space.ball_facets().rows.len());
    report.text("vertices", space.ball_vertices().points.len());
    report.check("ball valid", space.validate().passed(), "");
    Ok(())
}
