//! One function per subcommand. Each returns the artifacts as strings
//! and leaves placement (stdout or atomic file writes) to the caller
//! where practical; multi-file commands write through `io` directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use etgraph::graph::{complete_graph, random_regular};
use etgraph::quantize::{
    assignment_from_family, build_m, build_u, build_w, et_assignment, PhaseVector,
    ScatteringAssignment,
};
use etgraph::scatmat::{et_search, SearchOutcome, ScatteringFamily, ScatteringMatrix};
use etgraph::spectral::{gap_comparison, nb_walk_counts, spectrum_direct, spectrum_via_theorem};
use etgraph::stats::{
    ks_distance, number_variance, realization_phases, spacing_histogram, unfolded_spacings,
    EigenphaseEnsemble, EnsembleMetadata, RmtClass, VARIANCE_WINDOWS,
};
use etgraph::{ComplexMatrix, Error, GraphTopology, Result};

use crate::io::{emit, read_graph, write_atomic};
use crate::{ConstructArgs, FamilyArg, GraphKind, OperatorArg, RMode, SpectrumMethod, StatsEmit};

fn matrix_json(label: &str, sm: &ScatteringMatrix) -> Result<String> {
    let value = serde_json::json!({
        "family": label,
        "dim": sm.dim(),
        "r": sm.r_parameter(),
        "symmetry": sm.symmetry().to_string(),
        "matrix": sm.sigma(),
    });
    serde_json::to_string_pretty(&value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Backend(format!("serialization failed: {e}")))
}

pub fn construct(args: &ConstructArgs) -> Result<String> {
    let v = match (args.dim, args.family) {
        (Some(v), _) => v,
        (None, FamilyArg::EtFive) => 5,
        (None, FamilyArg::EtCharacter) => {
            args.prime.ok_or_else(|| {
                Error::InvalidArgument("et-character needs --dim or --prime".into())
            })? as usize
                + 1
        }
        (None, _) => {
            return Err(Error::InvalidArgument(
                "--dim is required for this family".into(),
            ))
        }
    };
    match args.family {
        FamilyArg::Neumann => matrix_json("neumann", &etgraph::scatmat::build_neumann(v)?),
        FamilyArg::Fourier => matrix_json("fourier", &etgraph::scatmat::build_fourier(v)?),
        FamilyArg::EtHadamard => {
            let h = etgraph::scatmat::build_skew_hadamard(v)?;
            matrix_json("et-hadamard", &etgraph::scatmat::et_from_hadamard(&h)?)
        }
        FamilyArg::EtCharacter => {
            let p = args.prime.unwrap_or((v as u64).saturating_sub(1));
            if p + 1 != v as u64 {
                return Err(Error::InvalidArgument(format!(
                    "character construction has dimension P + 1; got --dim {v} with --prime {p}"
                )));
            }
            let m = args
                .char_index
                .unwrap_or_else(|| etgraph::scatmat::legendre_index(p));
            matrix_json("et-character", &etgraph::scatmat::et_from_character(p, m)?)
        }
        FamilyArg::EtFive => {
            if v != 5 {
                return Err(Error::InvalidArgument(format!(
                    "the explicit ET example has dimension 5, not {v}"
                )));
            }
            matrix_json("et-five", &etgraph::scatmat::et_five())
        }
        FamilyArg::EtSearch => {
            let seed = args.seed.ok_or_else(|| {
                Error::InvalidArgument("--seed is required for et-search".into())
            })?;
            match et_search(v, seed, args.max_iters)? {
                SearchOutcome::Converged { matrix, .. } => matrix_json("et-search", &matrix),
                SearchOutcome::Failed { best_residual, .. } => Err(Error::NotConverged {
                    residual: best_residual,
                    bound: 1e-10,
                }),
            }
        }
        FamilyArg::Et => Err(Error::InvalidArgument(
            "construct needs a concrete family; 'et' resolution is for graph commands".into(),
        )),
    }
}

pub fn graph_cmd(
    kind: GraphKind,
    big_v: usize,
    valency: Option<usize>,
    seed: Option<u64>,
) -> Result<String> {
    let g = match kind {
        GraphKind::Complete => complete_graph(big_v)?,
        GraphKind::Regular => {
            let v = valency.ok_or_else(|| {
                Error::InvalidArgument("--v (valency) is required for --kind regular".into())
            })?;
            let s = seed.ok_or_else(|| {
                Error::InvalidArgument("--seed is required for --kind regular".into())
            })?;
            random_regular(v, big_v, s)?
        }
    };
    serde_json::to_string_pretty(&g)
        .map(|s| s + "\n")
        .map_err(|e| Error::Backend(format!("serialization failed: {e}")))
}

pub fn graph_spectrum(graph_path: &Path) -> Result<String> {
    let g = read_graph(graph_path)?;
    let mut out = String::from("index,mu\n");
    for (i, mu) in g.connectivity_spectrum()?.iter().enumerate() {
        writeln!(out, "{i},{mu}").expect("string write");
    }
    Ok(out)
}

/// Resolves a family argument into per-vertex scattering matrices.
fn assignment_for(g: &GraphTopology, family: FamilyArg) -> Result<ScatteringAssignment> {
    let mapped = match family {
        FamilyArg::Neumann => ScatteringFamily::Neumann,
        FamilyArg::Fourier => ScatteringFamily::Fourier,
        FamilyArg::EtHadamard => ScatteringFamily::EtHadamard,
        FamilyArg::EtCharacter => ScatteringFamily::EtCharacter,
        FamilyArg::EtFive => ScatteringFamily::EtFiveExample,
        FamilyArg::Et => return et_assignment(g),
        FamilyArg::EtSearch => {
            return Err(Error::InvalidArgument(
                "et-search matrices come from `construct`; graph commands take fixed families"
                    .into(),
            ))
        }
    };
    assignment_from_family(g, mapped, None)
}

pub fn quantize(
    graph_path: &Path,
    family: Option<FamilyArg>,
    operator: OperatorArg,
    seed: Option<u64>,
) -> Result<String> {
    let g = read_graph(graph_path)?;
    let need_family = || {
        family.ok_or_else(|| {
            Error::InvalidArgument("--family is required when emitting U or M".into())
        })
    };
    let (name, matrix, fam_label, used_seed): (&str, ComplexMatrix, Option<String>, Option<u64>) =
        match operator {
            OperatorArg::W => ("W", build_w(&g), None, None),
            OperatorArg::M => {
                let assign = assignment_for(&g, need_family()?)?;
                let label = assign.family_label();
                ("M", build_m(&g, &assign)?, Some(label), None)
            }
            OperatorArg::U => {
                let assign = assignment_for(&g, need_family()?)?;
                let s = seed.ok_or_else(|| {
                    Error::InvalidArgument("--seed is required for U (random bond phases)".into())
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let phases = PhaseVector::random(g.bond_count(), &mut rng);
                let label = assign.family_label();
                ("U", build_u(&g, &assign, &phases)?, Some(label), Some(s))
            }
        };
    let value = serde_json::json!({
        "operator": name,
        "dim": matrix.rows(),
        "vertices": g.vertex_count(),
        "family": fam_label,
        "seed": used_seed,
        "matrix": matrix,
    });
    serde_json::to_string_pretty(&value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Backend(format!("serialization failed: {e}")))
}

pub fn bass_check(graph_path: &Path, samples: usize) -> Result<String> {
    if samples == 0 {
        return Err(Error::InvalidArgument("--samples must be positive".into()));
    }
    let g = read_graph(graph_path)?;
    let mut out = String::from("re_u,im_u,residual\n");
    for k in 0..samples {
        let angle = std::f64::consts::TAU * k as f64 / samples as f64 + 0.35;
        let u = Complex64::from_polar(0.9, angle);
        let res = etgraph::quantize::bass_identity_residual(&g, u)?;
        writeln!(out, "{},{},{res}", u.re, u.im).expect("string write");
    }
    Ok(out)
}

fn family_r(g: &GraphTopology, mode: &RMode) -> Result<(f64, Option<FamilyArg>)> {
    let v = g.regular_valency().ok_or_else(|| {
        Error::GraphConstraint("spectrum commands need a regular graph".into())
    })? as f64;
    Ok(match mode {
        RMode::Et => (0.0, Some(FamilyArg::Et)),
        RMode::Fourier => (1.0 / v, Some(FamilyArg::Fourier)),
        RMode::Neumann => ((2.0 / v - 1.0) * (2.0 / v - 1.0), Some(FamilyArg::Neumann)),
        RMode::Value(r) => (*r, None),
    })
}

pub fn spectrum(graph_path: &Path, mode: &RMode, method: SpectrumMethod) -> Result<String> {
    let g = read_graph(graph_path)?;
    let (r, family) = family_r(&g, mode)?;
    if g.regular_valency() == Some(3) {
        eprintln!("warning: valency 3 sits outside the gap-comparison regime");
    }
    let mut out = String::from("re,im,source\n");
    let mut append = |spec: &etgraph::ClassicalSpectrum| {
        for z in spec.values() {
            writeln!(out, "{},{},{}", z.re, z.im, spec.source()).expect("string write");
        }
    };
    if matches!(method, SpectrumMethod::Theorem | SpectrumMethod::Both) {
        append(&spectrum_via_theorem(&g, r)?);
    }
    if matches!(method, SpectrumMethod::Direct | SpectrumMethod::Both) {
        let fam = family.ok_or_else(|| {
            Error::InvalidArgument(
                "a numeric --r has no scattering matrices; the direct route needs a family".into(),
            )
        })?;
        let assign = assignment_for(&g, fam)?;
        append(&spectrum_direct(&build_m(&g, &assign)?)?);
    }
    Ok(out)
}

pub fn gaps(graph_path: &Path) -> Result<String> {
    let g = read_graph(graph_path)?;
    let mut out = String::from("family,r,gap,condition_flags\n");
    for row in gap_comparison(&g)? {
        writeln!(out, "{},{},{},{}", row.family, row.r, row.gap, row.condition_flags())
            .expect("string write");
    }
    Ok(out)
}

pub fn orbits(graph_path: &Path, nmax: usize) -> Result<String> {
    let g = read_graph(graph_path)?;
    let mut out = String::from("n,trace_Wn\n");
    for (i, t) in nb_walk_counts(&g, nmax)?.iter().enumerate() {
        writeln!(out, "{},{t}", i + 1).expect("string write");
    }
    Ok(out)
}

pub struct StatsConfig {
    pub graph: PathBuf,
    pub family: FamilyArg,
    pub realizations: usize,
    pub seed: u64,
    pub emit: StatsEmit,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
    pub bins: usize,
    pub s_max: f64,
    pub l_max: f64,
}

fn family_arg_label(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::Neumann => "neumann",
        FamilyArg::Fourier => "fourier",
        FamilyArg::EtHadamard => "et-hadamard",
        FamilyArg::EtCharacter => "et-character",
        FamilyArg::EtFive => "et-five",
        FamilyArg::EtSearch => "et-search",
        FamilyArg::Et => "et",
    }
}

pub fn stats(cfg: &StatsConfig) -> Result<()> {
    let g = read_graph(&cfg.graph)?;
    let assign = assignment_for(&g, cfg.family)?;
    if cfg.realizations == 0 {
        return Err(Error::InvalidArgument(
            "--realizations must be positive".into(),
        ));
    }
    if cfg.bins == 0 || !(cfg.s_max > 0.0) || !(cfg.l_max > 0.0) {
        return Err(Error::InvalidArgument(
            "histogram and variance ranges must be positive".into(),
        ));
    }

    // Each realization draws from its own seeded stream, so any thread
    // count reproduces the sequential output bit for bit.
    let realization_list = {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs.unwrap_or(0))
            .build()
            .map_err(|e| Error::Backend(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..cfg.realizations)
                .into_par_iter()
                .map(|i| realization_phases(&g, &assign, cfg.seed, i as u64))
                .collect::<Result<Vec<_>>>()
        })?
    };
    let ensemble = EigenphaseEnsemble::from_realizations(
        realization_list,
        EnsembleMetadata {
            family: assign.family_label(),
            vertex_count: g.vertex_count(),
            master_seed: cfg.seed,
        },
    )?;
    let spacings = unfolded_spacings(&ensemble)?;

    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::Backend(format!("cannot create {}: {e}", cfg.out_dir.display())))?;

    if matches!(cfg.emit, StatsEmit::Ps | StatsEmit::Both) {
        let hist = spacing_histogram(&spacings, cfg.bins, cfg.s_max)?;
        let mut csv = String::from("s_mid,density,goe_ref,gue_ref\n");
        for (mid, d) in hist.midpoints().iter().zip(hist.densities()) {
            writeln!(
                csv,
                "{mid},{d},{},{}",
                RmtClass::Goe.spacing_pdf(*mid),
                RmtClass::Gue.spacing_pdf(*mid)
            )
            .expect("string write");
        }
        write_atomic(&cfg.out_dir.join("ps.csv"), &csv)?;
    }

    if matches!(cfg.emit, StatsEmit::Vl | StatsEmit::Both) {
        let mut l_grid = Vec::new();
        let mut l = 0.5;
        while l <= cfg.l_max + 1e-12 {
            l_grid.push(l);
            l += 0.5;
        }
        let curve = number_variance(&ensemble, &l_grid)?;
        let mut csv = String::from("L,V,stderr,goe_ref,gue_ref\n");
        for i in 0..l_grid.len() {
            writeln!(
                csv,
                "{},{},{},{},{}",
                curve.l_grid()[i],
                curve.variance()[i],
                curve.stderr()[i],
                RmtClass::Goe.number_variance(curve.l_grid()[i]),
                RmtClass::Gue.number_variance(curve.l_grid()[i])
            )
            .expect("string write");
        }
        write_atomic(&cfg.out_dir.join("vl.csv"), &csv)?;
    }

    let ks_goe = ks_distance(&spacings, RmtClass::Goe)?;
    let ks_gue = ks_distance(&spacings, RmtClass::Gue)?;
    let gap = spectrum_direct(&build_m(&g, &assign)?)?.gap();
    let mean: f64 = spacings.iter().sum::<f64>() / spacings.len() as f64;
    // `jobs` is deliberately absent: it must not influence any artifact.
    let summary = serde_json::json!({
        "config": {
            "graph": cfg.graph.display().to_string(),
            "family": family_arg_label(cfg.family),
            "resolved_family": ensemble.metadata().family,
            "realizations": cfg.realizations,
            "seed": cfg.seed,
            "emit": format!("{:?}", cfg.emit).to_lowercase(),
            "bins": cfg.bins,
            "s_max": cfg.s_max,
            "l_max": cfg.l_max,
        },
        "ensemble": {
            "vertices": g.vertex_count(),
            "phases_per_realization": ensemble.phase_count(),
            "total_spacings": spacings.len(),
            "variance_windows_per_realization": VARIANCE_WINDOWS,
            "unfolding": "circular, unit mean spacing",
            "defaults_note": "realization counts and grids are engineering defaults, not canonical values",
        },
        "results": {
            "ks_goe": ks_goe,
            "ks_gue": ks_gue,
            "classical_gap": gap,
            "mean_unfolded_spacing": mean,
        },
    });
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Backend(format!("serialization failed: {e}")))?
        + "\n";
    write_atomic(&cfg.out_dir.join("summary.json"), &text)?;
    Ok(())
}

pub fn search(dim: usize, seed: u64, max_iters: usize, out: Option<&Path>) -> Result<()> {
    let outcome = et_search(dim, seed, max_iters)?;
    let (report, failure) = match &outcome {
        SearchOutcome::Converged {
            matrix,
            iterations,
            restarts,
            residual,
        } => (
            serde_json::json!({
                "converged": true,
                "dim": dim,
                "seed": seed,
                "iterations": iterations,
                "restarts": restarts,
                "residual": residual,
                "symmetry": matrix.symmetry().to_string(),
                "matrix": matrix.sigma(),
            }),
            None,
        ),
        SearchOutcome::Failed {
            best_residual,
            iterations,
            restarts,
        } => (
            serde_json::json!({
                "converged": false,
                "dim": dim,
                "seed": seed,
                "iterations": iterations,
                "restarts": restarts,
                "residual": best_residual,
                "matrix": null,
            }),
            Some(Error::NotConverged {
                residual: *best_residual,
                bound: 1e-10,
            }),
        ),
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Backend(format!("serialization failed: {e}")))?
        + "\n";
    emit(out, &text)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
