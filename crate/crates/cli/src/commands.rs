use std::io::Write;
use std::path::Path;

use mdir_core::permute::{permutation_test, PermConfig};
use mdir_core::simstudy::asymptotic::asymptotic_power;
use mdir_core::simstudy::plot::power_curves_svg;
use mdir_core::simstudy::scenario::{menu_by_name, power_scenarios, type1_scenarios, weight_by_name};
use mdir_core::simstudy::{run_power_study, run_type1_study, write_csv, AsymptoticPowerSpec, StudyConfig};
use mdir_core::weights::{make_crossing, make_rg, select_independent_subset, WeightSet};
use mdir_core::{chi2_test, TwoSampleData};

use crate::args::{Format, SimulateArgs, Study, TestArgs};
use crate::error::CliError;
use crate::report::{CliReport, RandomizedReport, SCHEMA_VERSION};
use crate::{input, km, output};

/// Weight menu from the flags: `u^r(1 − u)^g` terms in the given order
/// (default `0,0`), then the crossing weight unless `--no-cross`. Linearly
/// dependent weights are dropped; their tags are returned.
pub fn resolve_menu(args: &TestArgs) -> Result<(WeightSet, Vec<String>), CliError> {
    let mut ws = Vec::new();
    let pairs: Vec<(u32, u32)> = if args.no_rg {
        Vec::new()
    } else if args.rg.is_empty() {
        vec![(0, 0)]
    } else {
        args.rg.clone()
    };
    for (r, g) in pairs {
        ws.push(make_rg(r, g).map_err(|e| CliError::Usage(e.to_string()))?);
    }
    if !args.no_cross {
        ws.push(make_crossing());
    }
    let set = WeightSet::new(ws).map_err(|e| CliError::Usage(e.to_string()))?;
    let (kept, dropped) = select_independent_subset(&set);
    let pruned = dropped.iter().map(|&i| set.weights()[i].tag().to_string()).collect();
    Ok((kept, pruned))
}

pub fn build_report(data: &TwoSampleData, args: &TestArgs) -> Result<CliReport, CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let (ws, pruned) = resolve_menu(args)?;
    let cfg = PermConfig {
        n_perm: args.nperm,
        seed: args.seed,
        report_randomized_gamma: args.randomized,
        retain_stats: false,
    };
    let perm = permutation_test(data, &ws, &cfg)?;
    let chi = chi2_test(perm.observed.clone(), args.alpha)?;
    let randomized = if args.randomized {
        perm.randomized_gamma(args.alpha).map(|r| RandomizedReport {
            alpha: args.alpha,
            critical: r.critical,
            gamma: r.gamma,
        })
    } else {
        None
    };
    Ok(CliReport {
        schema_version: SCHEMA_VERSION,
        n: data.n(),
        n1: data.n1(),
        n2: data.n2(),
        labels: data.labels().clone(),
        weights: ws.tags(),
        pruned,
        s_n: perm.s_obs,
        df: chi.stat.df_used,
        alpha: args.alpha,
        p_perm: perm.p_perm,
        p_chi2: chi.p_chi2,
        reject_perm: perm.reject_at(args.alpha),
        reject_chi2: chi.reject_at(args.alpha),
        n_perm: perm.n_perm_used,
        seed: perm.seed,
        per_direction: chi.stat.per_direction.clone(),
        randomized,
    })
}

pub fn cmd_test(args: &TestArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<CliReport, CliError> {
    let data = input::load(&args.input)?;
    let report = build_report(&data, args)?;
    if !report.pruned.is_empty() {
        let _ = writeln!(
            stderr,
            "warning: dropped linearly dependent weights: {}",
            report.pruned.join(", ")
        );
    }
    let body = match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    if let Some(path) = &args.km_svg {
        output::write_atomic(path, km::km_svg(&data).as_bytes())?;
    }
    emit(args.out.as_deref(), body.as_bytes(), stdout)?;
    Ok(report)
}

fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => output::write_atomic(path, bytes),
        None => stdout.write_all(bytes).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn load_config(path: &Path) -> Result<StudyConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(StudyConfig::from_toml(&text)?)
}

pub fn asymptotic_csv(cfg: &StudyConfig) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let out = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(["id", "direction", "theta", "menu", "eta", "lambda", "df", "power"])
        .map_err(out)?;
    for case in &cfg.asymptotic {
        let (c1, c2) = case.censoring.rates()?;
        let spec = AsymptoticPowerSpec {
            eta: case.eta,
            censoring_rate1: c1,
            censoring_rate2: c2,
            direction: weight_by_name(&case.direction)?,
            theta: case.theta,
            menu: menu_by_name(&case.menu)?.set,
            alpha: cfg.alpha,
        };
        let res = asymptotic_power(&spec)?;
        w.write_record([
            case.id.clone(),
            case.direction.clone(),
            format!("{}", case.theta),
            case.menu.clone(),
            format!("{}", case.eta),
            format!("{:.10}", res.lambda),
            res.df.to_string(),
            format!("{:.10}", res.power),
        ])
        .map_err(out)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    if args.svg.is_some() && args.study != Study::Power {
        return Err(CliError::Usage("--svg is only available for power studies".into()));
    }
    let csv_text = match args.study {
        Study::Type1 => {
            let reports = run_type1_study(&type1_scenarios(&cfg, args.paper_scale)?)?;
            reports_csv(&reports)?
        }
        Study::Power => {
            let reports = run_power_study(&power_scenarios(&cfg, args.paper_scale)?)?;
            if let Some(dir) = &args.svg {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
                for (id, svg) in power_curves_svg(&reports) {
                    output::write_atomic(&dir.join(format!("{}.svg", file_stem(&id))), svg.as_bytes())?;
                }
            }
            reports_csv(&reports)?
        }
        Study::Asympt => asymptotic_csv(&cfg)?,
    };
    emit(args.out.as_deref(), csv_text.as_bytes(), stdout)
}

fn reports_csv(reports: &[mdir_core::simstudy::SimReport]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn args(extra: &[&str]) -> TestArgs {
        let mut v = vec!["mdir", "test", "--input", "x.csv"];
        v.extend_from_slice(extra);
        match crate::args::Cli::parse_from(v).command {
            crate::args::Command::Test(t) => t,
            _ => unreachable!(),
        }
    }

    #[test]
    fn default_menu_is_two_direction() {
        let (ws, pruned) = resolve_menu(&args(&[])).unwrap();
        assert_eq!(ws.tags(), vec!["w(0,0)", "cross"]);
        assert!(pruned.is_empty());
    }

    #[test]
    fn four_direction_and_single_menus() {
        let (ws, _) = resolve_menu(&args(&["--cross", "--rg", "0,0", "--rg", "1,1", "--rg", "1,5"])).unwrap();
        assert_eq!(ws.tags(), vec!["w(0,0)", "w(1,1)", "w(1,5)", "cross"]);
        let (ws, _) = resolve_menu(&args(&["--no-rg"])).unwrap();
        assert_eq!(ws.tags(), vec!["cross"]);
        let (ws, _) = resolve_menu(&args(&["--no-cross", "--rg", "1,1"])).unwrap();
        assert_eq!(ws.tags(), vec!["w(1,1)"]);
        assert!(resolve_menu(&args(&["--no-cross", "--no-rg"])).is_err());
        // last of --cross / --no-cross wins
        let (ws, _) = resolve_menu(&args(&["--no-cross", "--cross"])).unwrap();
        assert_eq!(ws.len(), 2);
    }

    #[test]
    fn duplicates_pruned() {
        let (ws, pruned) = resolve_menu(&args(&["--rg", "0,0", "--rg", "0,0"])).unwrap();
        assert_eq!(ws.tags(), vec!["w(0,0)", "cross"]);
        assert_eq!(pruned, vec!["w(0,0)"]);
    }
}
