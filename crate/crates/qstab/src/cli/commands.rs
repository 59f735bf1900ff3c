//! Implementations of the five subcommands.

use super::config::ConfigFile;
use super::output::{
    certificate_document, fmt9, mat_to_text, parse_matrix, parse_square_sym, parse_vector,
    sym_to_text, theorem_name, CertificateContext,
};
use super::{
    signal_spec, svg, AnalyzeArgs, CliError, RegionArgs, ReproduceArgs, SimulateArgs, SweepArgs,
};
use crate::benchmark;
use crate::informativity::{
    maximize_beta, region_scan, sampled_sufficient, synthesize, DataQmi, MarginVerdict,
    StabilizationCertificate, SufficiencyVerdict, SynthesisVerdict,
};
use crate::linalg::SymMatrix;
use crate::noise::{
    estimate_square_lipschitz, estimate_total_square_variation, inflate_budget,
    integral_noise_matrix, NoiseBudget, RegularityCertificate,
};
use crate::signals::csv::{read_trajectory, write_trajectory, LoadedTrajectory};
use crate::signals::{
    gramian_cont, gramian_disc, paper_example_signals, sample, simulate_lti, GriddedSignal,
    LtiSystem, TrajectoryData,
};
use std::path::Path;

pub fn simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let cfg = ConfigFile::load_opt(&args.config)?;
    let section = "simulate";
    let paper = args.paper_example || cfg.raw(section, "paper-example") == Some("true");
    let out: String = cfg.require(&args.out, section, "out")?;

    let (traj, noise): (TrajectoryData, GriddedSignal) = if paper {
        let h = cfg.resolve(&args.h, section, "h")?.unwrap_or(benchmark::DEFAULT_GRID_STEP);
        paper_example_signals(h)?
    } else {
        let h: f64 = cfg.require(&args.h, section, "h")?;
        let horizon: f64 = cfg.require(&args.horizon, section, "horizon")?;
        let a_text: String = cfg.require(&args.a, section, "a")?;
        let b_text: String = cfg.require(&args.b, section, "b")?;
        let x0_text: String = cfg.require(&args.x0, section, "x0")?;
        let input_text: String = cfg.require(&args.input, section, "input")?;
        let a = parse_matrix(&a_text, "--a")?;
        let b = parse_matrix(&b_text, "--b")?;
        let x0 = parse_vector(&x0_text, "--x0")?;
        let sys = LtiSystem::new(a, b)?;
        let u = signal_spec::materialize(&input_text, h, horizon)?;
        if u.dim() != sys.input_dim() {
            return Err(CliError(format!(
                "--input has {} channels but the input matrix expects {}",
                u.dim(),
                sys.input_dim()
            )));
        }
        let noise = match cfg.resolve(&args.noise, section, "noise")? {
            Some(spec) => signal_spec::materialize(&spec, h, horizon)?,
            None => GriddedSignal::zero(sys.state_dim(), h, horizon)?,
        };
        if noise.dim() != sys.state_dim() {
            return Err(CliError(format!(
                "--noise has {} channels but the state dimension is {}",
                noise.dim(),
                sys.state_dim()
            )));
        }
        let traj = simulate_lti(&sys, &x0, &u, &noise)?;
        (traj, noise)
    };

    write_trajectory(Path::new(&out), &traj, Some(&noise))?;
    let energy = integral_noise_matrix(&noise);
    println!("wrote {} ({} rows)", out, traj.x.len());
    println!("noise energy matrix = {}", sym_to_text(&energy));
    let lip = estimate_square_lipschitz(&noise);
    let var = estimate_total_square_variation(&noise);
    println!("grid square-Lipschitz estimate (lower bound) = {}", fmt9(lip.constant()));
    println!("grid total-square-variation estimate (lower bound) = {}", fmt9(var.constant()));
    Ok(0)
}

struct LoadedAnalysis {
    loaded: LoadedTrajectory,
    q: SymMatrix,
    data_path: String,
}

fn load_for_analysis(
    cfg: &ConfigFile,
    section: &str,
    data: &Option<String>,
    q: &Option<String>,
) -> Result<LoadedAnalysis, CliError> {
    let data_path: String = cfg.require(data, section, "data")?;
    let loaded = read_trajectory(Path::new(&data_path))?;
    let n = loaded.traj.state_dim();
    let q = match cfg.resolve::<String>(q, section, "q")? {
        Some(text) => parse_square_sym(&text, "--q")?,
        None => SymMatrix::identity(n),
    };
    if q.dim() != n {
        return Err(CliError(format!(
            "--q has dimension {} but the data has {} states",
            q.dim(),
            n
        )));
    }
    Ok(LoadedAnalysis { loaded, q, data_path })
}

fn regularity_from(
    lipschitz: Option<f64>,
    tsv: Option<f64>,
) -> Result<Option<(RegularityCertificate, &'static str, f64)>, CliError> {
    match (lipschitz, tsv) {
        (Some(_), Some(_)) => Err(CliError(
            "--lipschitz and --tsv are mutually exclusive".into(),
        )),
        (Some(l), None) => {
            if l < 0.0 {
                return Err(CliError("--lipschitz must be nonnegative".into()));
            }
            Ok(Some((RegularityCertificate::assumed_square_lipschitz(l), "square-lipschitz", l)))
        }
        (None, Some(v)) => {
            if v < 0.0 {
                return Err(CliError("--tsv must be nonnegative".into()));
            }
            Ok(Some((
                RegularityCertificate::assumed_total_square_variation(v),
                "total-square-variation",
                v,
            )))
        }
        (None, None) => Ok(None),
    }
}

fn print_certificate(cert: &StabilizationCertificate) {
    println!("theorem = {}", theorem_name(cert.theorem));
    println!("K = {}", mat_to_text(&cert.k));
    println!("P = {}", sym_to_text(&cert.p));
    println!("beta = {}", fmt9(cert.beta));
    println!("phase1_margin = {}", fmt9(cert.solver.phase1_margin));
    println!("feasibility_margin = {}", fmt9(cert.solver.feasibility_margin));
    println!("duality_gap = {}", fmt9(cert.solver.duality_gap));
    println!("p_condition = {}", fmt9(cert.p_condition));
}

pub fn analyze(args: AnalyzeArgs) -> Result<i32, CliError> {
    let cfg = ConfigFile::load_opt(&args.config)?;
    let section = "analyze";
    let mode: String = cfg.require(&args.mode, section, "mode")?;
    let analysis = load_for_analysis(&cfg, section, &args.data, &args.q)?;
    let traj = &analysis.loaded.traj;
    let horizon = traj.horizon();
    let delta = cfg.resolve(&args.delta, section, "delta")?;
    let lipschitz = cfg.resolve(&args.lipschitz, section, "lipschitz")?;
    let tsv = cfg.resolve(&args.tsv, section, "tsv")?;
    let regularity = regularity_from(lipschitz, tsv)?;

    let need_delta = || -> Result<f64, CliError> {
        let d = delta.ok_or_else(|| CliError(format!("mode '{mode}' needs --delta")))?;
        if d < traj.step() {
            return Err(CliError(format!(
                "--delta {d} is finer than the measurement grid step {}",
                traj.step()
            )));
        }
        Ok(d)
    };

    enum Outcome {
        Synthesis(SynthesisVerdict),
        Sufficiency(SufficiencyVerdict),
    }

    let (qmi, outcome): (DataQmi, Outcome) = match mode.as_str() {
        "cont" => {
            let budget = NoiseBudget::continuous(analysis.q.clone(), horizon)?;
            let qmi = DataQmi::assemble(&gramian_cont(traj), &budget)?;
            let verdict = synthesize(&qmi)?;
            (qmi, Outcome::Synthesis(verdict))
        }
        "sampled" => {
            let d = need_delta()?;
            let budget = NoiseBudget::discrete(analysis.q.clone(), horizon, d)?;
            let qmi = DataQmi::assemble(&gramian_disc(&sample(traj, d)?), &budget)?;
            let verdict = synthesize(&qmi)?;
            (qmi, Outcome::Synthesis(verdict))
        }
        "sampled-sufficient" => {
            let d = need_delta()?;
            let Some((reg, _, _)) = regularity else {
                return Err(CliError(
                    "mode 'sampled-sufficient' needs --lipschitz or --tsv".into(),
                ));
            };
            let budget = NoiseBudget::discrete(analysis.q.clone(), horizon, d)?;
            let qmi = DataQmi::assemble(&gramian_disc(&sample(traj, d)?), &budget)?;
            let verdict = sampled_sufficient(&qmi, &reg)?;
            (qmi, Outcome::Sufficiency(verdict))
        }
        other => {
            return Err(CliError(format!(
                "unknown mode '{other}' (expected cont, sampled or sampled-sufficient)"
            )));
        }
    };

    let (verdict_word, cert, phase1): (&str, Option<&StabilizationCertificate>, f64) =
        match &outcome {
            Outcome::Synthesis(SynthesisVerdict::Informative(c)) => {
                ("INFORMATIVE", Some(c), c.solver.phase1_margin)
            }
            Outcome::Synthesis(SynthesisVerdict::NotInformative { phase1_margin }) => {
                ("NOT-INFORMATIVE", None, *phase1_margin)
            }
            Outcome::Synthesis(SynthesisVerdict::Indeterminate { phase1_margin }) => {
                ("INDETERMINATE", None, *phase1_margin)
            }
            Outcome::Sufficiency(SufficiencyVerdict::Certified(c)) => {
                ("INFORMATIVE", Some(c), c.solver.phase1_margin)
            }
            Outcome::Sufficiency(SufficiencyVerdict::Insufficient { phase1_margin }) => {
                ("INSUFFICIENT", None, *phase1_margin)
            }
            Outcome::Sufficiency(SufficiencyVerdict::Indeterminate { phase1_margin }) => {
                ("INDETERMINATE", None, *phase1_margin)
            }
        };

    println!("{verdict_word}");
    if analysis.loaded.xdot_estimated {
        println!("note: derivative column missing; estimated by finite differences");
    }
    match cert {
        Some(c) => print_certificate(c),
        None => println!("phase1_margin = {}", fmt9(phase1)),
    }

    if let Some(out) = cfg.resolve::<String>(&args.out, section, "out")? {
        let ctx = CertificateContext {
            verdict: verdict_word,
            mode: &mode,
            data_path: &analysis.data_path,
            horizon,
            delta,
            q: &analysis.q,
            regularity: regularity.as_ref().map(|(_, kind, v)| (*kind, *v)),
            xdot_estimated: analysis.loaded.xdot_estimated,
            phase1_margin: phase1,
        };
        std::fs::write(Path::new(&out), certificate_document(&ctx, cert))?;
        println!("certificate written to {out}");
    }
    let _ = qmi;
    Ok(if verdict_word == "INFORMATIVE" { 0 } else { 1 })
}

fn sanitize_csv(text: &str) -> String {
    text.replace(',', ";")
}

pub fn sweep(args: SweepArgs) -> Result<i32, CliError> {
    let cfg = ConfigFile::load_opt(&args.config)?;
    let section = "sweep";
    let analysis = load_for_analysis(&cfg, section, &args.data, &args.q)?;
    let traj = &analysis.loaded.traj;
    let horizon = traj.horizon();
    let deltas_text: String = cfg.require(&args.deltas, section, "deltas")?;
    let out: String = cfg.require(&args.out, section, "out")?;
    let lipschitz = cfg.resolve(&args.lipschitz, section, "lipschitz")?;
    let deltas: Vec<f64> = if deltas_text.trim().is_empty() {
        Vec::new()
    } else {
        parse_vector(&deltas_text, "--deltas")?
    };

    let mut rows = vec!["delta,thm2_verdict,beta_hat,thm3_floor,thm3_verdict".to_string()];
    for &delta in &deltas {
        let row = sweep_row(traj, &analysis.q, horizon, delta, lipschitz);
        rows.push(row?);
    }
    std::fs::write(Path::new(&out), rows.join("\n") + "\n")?;
    println!("wrote {} ({} stepsizes)", out, deltas.len());
    Ok(0)
}

fn sweep_row(
    traj: &TrajectoryData,
    q: &SymMatrix,
    horizon: f64,
    delta: f64,
    lipschitz: Option<f64>,
) -> Result<String, CliError> {
    if delta < traj.step() {
        return Ok(format!(
            "{},SKIPPED: stepsize finer than measurement grid,,,",
            fmt9(delta)
        ));
    }
    let sampled = match sample(traj, delta) {
        Ok(s) => s,
        Err(e) => return Ok(format!("{},SKIPPED: {},,,", fmt9(delta), sanitize_csv(&e.to_string()))),
    };
    let budget = NoiseBudget::discrete(q.clone(), horizon, delta)?;
    let qmi = DataQmi::assemble(&gramian_disc(&sampled), &budget)?;
    let thm2 = match synthesize(&qmi)? {
        SynthesisVerdict::Informative(_) => "INFORMATIVE",
        SynthesisVerdict::NotInformative { .. } => "NOT-INFORMATIVE",
        SynthesisVerdict::Indeterminate { .. } => "INDETERMINATE",
    };
    let beta_hat = match maximize_beta(&qmi)? {
        MarginVerdict::Feasible(r) => fmt9(r.beta_hat),
        _ => String::new(),
    };
    let (floor_text, thm3_text) = match lipschitz {
        Some(l) => {
            let reg = RegularityCertificate::assumed_square_lipschitz(l);
            let floor = 0.5 * delta * horizon * l;
            let verdict = match sampled_sufficient(&qmi, &reg)? {
                SufficiencyVerdict::Certified(_) => "INFORMATIVE",
                SufficiencyVerdict::Insufficient { .. } => "INSUFFICIENT",
                SufficiencyVerdict::Indeterminate { .. } => "INDETERMINATE",
            };
            (fmt9(floor), verdict.to_string())
        }
        None => (String::new(), String::new()),
    };
    Ok(format!("{},{thm2},{beta_hat},{floor_text},{thm3_text}", fmt9(delta)))
}

pub fn region(args: RegionArgs) -> Result<i32, CliError> {
    let cfg = ConfigFile::load_opt(&args.config)?;
    let section = "region";
    let analysis = load_for_analysis(&cfg, section, &args.data, &args.q)?;
    let traj = &analysis.loaded.traj;
    if traj.state_dim() != 1 || traj.input_dim() != 1 {
        return Err(CliError(format!(
            "region scans need scalar data (n = m = 1), got n = {}, m = {}",
            traj.state_dim(),
            traj.input_dim()
        )));
    }
    let horizon = traj.horizon();
    let delta: f64 = cfg.require(&args.delta, section, "delta")?;
    if delta < traj.step() {
        return Err(CliError(format!(
            "--delta {delta} is finer than the measurement grid step {}",
            traj.step()
        )));
    }
    let lipschitz: f64 = cfg.require(&args.lipschitz, section, "lipschitz")?;
    let out: String = cfg.require(&args.out, section, "out")?;
    let a_min = cfg.resolve(&args.a_min, section, "a-min")?.unwrap_or(-6.0);
    let a_max = cfg.resolve(&args.a_max, section, "a-max")?.unwrap_or(6.0);
    let b_min = cfg.resolve(&args.b_min, section, "b-min")?.unwrap_or(-6.0);
    let b_max = cfg.resolve(&args.b_max, section, "b-max")?.unwrap_or(6.0);
    let na = cfg.resolve(&args.na, section, "na")?.unwrap_or(121);
    let nb = cfg.resolve(&args.nb, section, "nb")?.unwrap_or(121);
    let workers = cfg.resolve(&args.workers, section, "workers")?.unwrap_or(1);
    if a_min > a_max || b_min > b_max {
        return Err(CliError("window bounds must satisfy min <= max".into()));
    }

    let cont_budget = NoiseBudget::continuous(analysis.q.clone(), horizon)?;
    let q_cont = DataQmi::assemble(&gramian_cont(traj), &cont_budget)?;
    let disc_gramian = gramian_disc(&sample(traj, delta)?);
    let disc_budget = NoiseBudget::discrete(analysis.q.clone(), horizon, delta)?;
    let q_samp = DataQmi::assemble(&disc_gramian, &disc_budget)?;
    let margin = 0.5 * delta * horizon * lipschitz;
    let inflated_budget = inflate_budget(&disc_budget, margin);
    let q_infl = DataQmi::assemble(&disc_gramian, &inflated_budget)?;

    let tol = 1e-9;
    let window = ((a_min, a_max), (b_min, b_max));
    let cont = region_scan(&q_cont, window.0, window.1, (na, nb), tol, workers)?;
    let samp = region_scan(&q_samp, window.0, window.1, (na, nb), tol, workers)?;
    let infl = region_scan(&q_infl, window.0, window.1, (na, nb), tol, workers)?;

    let mut rows = vec!["a,b,in_cont,in_delta,in_delta_inflated".to_string()];
    for (i, &a) in cont.a_values.iter().enumerate() {
        for (j, &b) in cont.b_values.iter().enumerate() {
            rows.push(format!(
                "{},{},{},{},{}",
                fmt9(a),
                fmt9(b),
                cont.at(i, j) as u8,
                samp.at(i, j) as u8,
                infl.at(i, j) as u8
            ));
        }
    }
    std::fs::write(Path::new(&out), rows.join("\n") + "\n")?;
    println!("wrote {} ({} cells)", out, na * nb);

    if let Some(svg_path) = cfg.resolve::<String>(&args.svg, section, "svg")? {
        let markers: Vec<(f64, f64)> = if args.mark.is_empty() {
            vec![benchmark::TRUE_SYSTEM, benchmark::INDISTINGUISHABLE_SYSTEM]
        } else {
            args.mark
                .iter()
                .map(|text| {
                    let v = parse_vector(text, "--mark")?;
                    if v.len() != 2 {
                        return Err(CliError(format!("--mark '{text}' must be 'a,b'")));
                    }
                    Ok((v[0], v[1]))
                })
                .collect::<Result<_, _>>()?
        };
        let layers = svg::RegionLayers { cont: &cont, sampled: &samp, inflated: &infl };
        std::fs::write(Path::new(&svg_path), svg::render(&layers, &markers))?;
        println!("wrote {svg_path}");
    }
    Ok(0)
}

fn print_matrix_comparison(name: &str, computed: &SymMatrix, reference: &[[f64; 3]; 3]) {
    println!("{name} (computed | reference):");
    for i in 0..3 {
        let comp: Vec<String> = (0..3).map(|j| format!("{:+.6}", computed.get(i, j))).collect();
        let refs: Vec<String> = (0..3).map(|j| format!("{:+.4}", reference[i][j])).collect();
        println!("  {}   |   {}", comp.join("  "), refs.join("  "));
    }
    println!("  max deviation = {}", fmt9(benchmark::max_deviation(computed, reference)));
}

pub fn reproduce_paper(args: ReproduceArgs) -> Result<i32, CliError> {
    let report = benchmark::reproduce(args.h)?;
    println!("benchmark reproduction at h = {}", fmt9(args.h));
    println!();
    print_matrix_comparison("continuous data matrix", &report.n_cont, &benchmark::REFERENCE_N_CONT);
    for (d, reference) in report.per_delta.iter().zip(&benchmark::REFERENCE_N_DELTA) {
        println!();
        print_matrix_comparison(&format!("sampled data matrix, delta = {}", d.delta), &d.matrix, reference);
        println!(
            "  origin consistent: {}; verdict: {:?}; margin: {:?}",
            d.origin_member, d.informative, d.beta_hat
        );
    }
    println!();
    println!("noise energy = {}", fmt9(report.noise_energy));
    println!("continuous verdict: {:?}", report.continuous_informative);
    println!(
        "reference triple (P, K, beta) = (1/2, 2, 1/10): residual = {}",
        fmt9(report.reference_triple.lmi_min_eig)
    );
    println!("margin maximum = {}", fmt9(report.beta_hat));
    println!("admissible stepsize bound = {}", fmt9(report.stepsize_bound));
    println!(
        "sufficiency at delta = 1/64: beta = {:?}, closed loop = {:?}",
        report.sufficiency_beta, report.sufficiency_closed_loop
    );
    println!();
    let criteria = report.criteria(args.tol);
    let mut all = true;
    for (idx, c) in criteria.iter().enumerate() {
        let word = if c.pass { "PASS" } else { "FAIL" };
        println!("[{:>2}] {word} {} ({})", idx + 1, c.name, c.detail);
        all &= c.pass;
    }
    Ok(if all { 0 } else { 1 })
}
