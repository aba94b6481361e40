//! The four subcommands. Each renders its whole output into memory so that a
//! failed run never leaves a partial file behind.

use serde::Serialize;
use serde_json::json;

use polyconf::crofton::{monotonicity_scan, KappaMethod, ScanOptions};
use polyconf::measures::{mu_b_grid, mu_i_grid, nu_grids, DensityGrid};
use polyconf::moduli::ConfinedRegionSpec;
use polyconf::sampling::{sample_confined, sample_shell, PolygonSample, Sampled, SamplerOptions, ShellSpec};
use polyconf::verify::{run_suite, Suite, VerifyConfig};

use crate::config::{Format, MeasureFamily, MethodArg, RunConfig};
use crate::Failure;

/// Rendered output and whether the run's verdict passed.
pub struct Output {
    pub text: String,
    pub pass: bool,
}

/// Fixed 17-significant-digit rendering used for every CSV number.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_table(cfg: &RunConfig, extra_comments: &[String], header: &[String], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut out = cfg.header_comment();
    for c in extra_comments {
        out.push_str(&format!("# {c}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(row).map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(internal)?);
    Ok(out)
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn json_doc(cfg: &RunConfig, body: serde_json::Value) -> Result<String, Failure> {
    let doc = json!({ "config": cfg, "result": body });
    let mut s = serde_json::to_string_pretty(&doc).map_err(internal)?;
    s.push('\n');
    Ok(s)
}

fn pass_label(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn curve(cfg: &RunConfig) -> Result<Output, Failure> {
    let method = match cfg.method {
        MethodArg::Quadrature => KappaMethod::Quadrature { tol: cfg.tol },
        MethodArg::MonteCarlo => KappaMethod::MonteCarlo { samples: cfg.samples, seed: cfg.seed },
    };
    let opts = ScanOptions { method, h: cfg.h, exec: cfg.exec() };
    let (curve, verdict) = monotonicity_scan(&cfg.r_grid(), &opts)?;
    let text = match cfg.format {
        Format::Csv => {
            let header = ["r", "kappa_bar", "method", "std_error", "area", "kappa_B", "crofton_residual"].map(String::from);
            let mut rows: Vec<Vec<String>> = (0..curve.r_values.len())
                .map(|i| {
                    let k = &curve.kappa_bar[i];
                    vec![
                        num(curve.r_values[i]),
                        num(k.value),
                        k.method.label().to_string(),
                        num(k.std_error),
                        num(curve.area[i]),
                        num(curve.kappa_b[i]),
                        num(curve.crofton_residual[i]),
                    ]
                })
                .collect();
            rows.push(vec![
                "verdict".into(),
                pass_label(verdict.pass).into(),
                "worst_excess".into(),
                num(verdict.worst_excess),
                String::new(),
                String::new(),
                String::new(),
            ]);
            csv_table(cfg, &[], &header, &rows)?
        }
        Format::Json => json_doc(cfg, json!({ "curve": curve, "verdict": verdict }))?,
    };
    Ok(Output { text, pass: verdict.pass })
}

#[derive(Serialize)]
struct BoundaryDoc<'a> {
    family: MeasureFamily,
    boundary: Vec<&'a DensityGrid>,
    interior: Vec<&'a DensityGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

pub fn boundary(cfg: &RunConfig) -> Result<Output, Failure> {
    let r = cfg.r.unwrap_or(f64::NAN);
    let (b, i, alpha) = match cfg.measure {
        MeasureFamily::Mu => {
            let b = mu_b_grid(r, cfg.grid_size)?;
            let i = mu_i_grid(r, cfg.grid_size, b.alpha)?;
            let alpha = b.alpha;
            (vec![b.ell, b.theta], vec![i.ell, i.theta], Some(alpha))
        }
        MeasureFamily::Nu => {
            let (b, i) = nu_grids(r, cfg.grid_size)?;
            (vec![b], vec![i], None)
        }
    };
    let text = match cfg.format {
        Format::Csv => {
            let names = match cfg.measure {
                MeasureFamily::Mu => ["mu_B", "mu_I"],
                MeasureFamily::Nu => ["nu_B", "nu_I"],
            };
            let header = vec!["arc".into(), "param".into(), names[0].into(), names[1].into()];
            let mut rows = Vec::new();
            for (gb, gi) in b.iter().zip(&i) {
                for k in 0..gb.len() {
                    rows.push(vec![gb.arc.kind.label().into(), num(gb.params[k]), num(gb.density[k]), num(gi.density[k])]);
                }
            }
            let mass = |g: &[DensityGrid]| g.iter().map(|d| d.normalized_mass).sum::<f64>();
            match alpha {
                // Closed-form alpha, then the share of each tabulated measure on the ell arc.
                Some(a) => rows.push(vec![
                    "alpha".into(),
                    num(a),
                    num(b[0].normalized_mass / mass(&b)),
                    num(i[0].normalized_mass / mass(&i)),
                ]),
                None => rows.push(vec!["mass".into(), String::new(), num(mass(&b)), num(mass(&i))]),
            }
            csv_table(cfg, &[], &header, &rows)?
        }
        Format::Json => json_doc(
            cfg,
            serde_json::to_value(BoundaryDoc {
                family: cfg.measure,
                boundary: b.iter().collect(),
                interior: i.iter().collect(),
                alpha,
            })
            .map_err(internal)?,
        )?,
    };
    Ok(Output { text, pass: true })
}

pub fn verify(cfg: &RunConfig) -> Result<Output, Failure> {
    let suite: Suite = cfg.suite.parse().map_err(|e: polyconf::Error| Failure::Usage(e.to_string()))?;
    let vc = VerifyConfig {
        seed: cfg.seed,
        samples: cfg.samples,
        mc_samples: cfg.mc_samples,
        grid_size: cfg.grid_size,
        exec: cfg.exec(),
    };
    let report = run_suite(suite, &vc)?;
    for c in &report.checks {
        eprintln!("{} {}", pass_label(c.pass), c.name);
    }
    let text = match cfg.format {
        Format::Json => json_doc(cfg, serde_json::to_value(&report).map_err(internal)?)?,
        Format::Csv => {
            let header = ["name", "measured", "tolerance", "margin", "pass"].map(String::from);
            let mut rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| vec![c.name.clone(), num(c.measured), num(c.tolerance), num(c.margin), pass_label(c.pass).into()])
                .collect();
            rows.push(vec!["verdict".into(), String::new(), String::new(), String::new(), pass_label(report.pass).into()]);
            csv_table(cfg, &[], &header, &rows)?
        }
    };
    Ok(Output { text, pass: report.pass })
}

pub fn sample(cfg: &RunConfig) -> Result<Output, Failure> {
    let opts = SamplerOptions { exec: cfg.exec(), ..Default::default() };
    let n = cfg.n;
    let run: Sampled<PolygonSample> = match cfg.r_min {
        Some(lo) => sample_shell(&ShellSpec::new(n, lo)?, cfg.samples, cfg.seed, &opts)?,
        None => {
            let r = cfg.r.unwrap_or((n / 2) as f64);
            sample_confined(&ConfinedRegionSpec::new(n, r)?, cfg.samples, cfg.seed, &opts)?
        }
    };
    let stats = vec![
        format!("proposals = {}", run.proposals),
        format!("accepted = {}", run.accepted),
        format!("acceptance_rate = {}", num(run.acceptance_rate())),
    ];
    let text = match cfg.format {
        Format::Csv => {
            let mut header = vec!["index".to_string()];
            header.extend((3..n).map(|i| format!("ell_{i}")));
            header.extend((3..n).map(|i| format!("theta_{i}")));
            header.extend(["curvature", "diameter", "accepted"].map(String::from));
            let rows: Vec<Vec<String>> = run
                .items
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let mut row = vec![k.to_string()];
                    row.extend(s.coords.ells.iter().map(|&x| num(x)));
                    row.extend(s.coords.thetas.iter().map(|&x| num(x)));
                    row.extend([num(s.curvature), num(s.diameter), "true".into()]);
                    row
                })
                .collect();
            csv_table(cfg, &stats, &header, &rows)?
        }
        Format::Json => json_doc(
            cfg,
            json!({
                "proposals": run.proposals,
                "accepted": run.accepted,
                "acceptance_rate": run.acceptance_rate(),
                "approximate": run.approximate,
                "samples": run.items,
            }),
        )?,
    };
    Ok(Output { text, pass: true })
}
