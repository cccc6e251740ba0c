//! End-of-trial dose decision with an auditable trace.

use crate::input::TrialInputDocument;
use crate::report::{
    sequential_method_report, zone_code, ArmReport, DecisionReport, DoseEcho, MethodReport,
    StepReport, VerdictReport,
};
use anyhow::{bail, Context, Result};
use umet_core::decision::{
    pairwise_matrix, sequential_select, Metric, Strategy,
};
use umet_core::empirical::{
    empirical_sequential, EmpiricalArm, EmpiricalCell, ResolvedCell,
};
use umet_core::utility::{ArmData, RateConversion};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Umet,
    Cui,
    Empirical,
    All,
}

impl MethodChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "umet" => Ok(Self::Umet),
            "cui" => Ok(Self::Cui),
            "empirical" => Ok(Self::Empirical),
            "all" => Ok(Self::All),
            other => bail!("unknown method '{other}'; expected umet, cui, empirical, or all"),
        }
    }

    fn wants(&self, m: MethodChoice) -> bool {
        *self == MethodChoice::All || *self == m
    }
}

pub struct DecideArgs {
    pub input: std::path::PathBuf,
    pub method: MethodChoice,
    pub strategy: Strategy,
    pub round_counts: bool,
    pub json_out: Option<std::path::PathBuf>,
}

/// Run the requested methods; returns false when some requested method could
/// not select a dose.
pub fn cmd_decide(args: &DecideArgs, out: &mut impl std::io::Write) -> Result<bool> {
    let doc = TrialInputDocument::from_path(&args.input)?;
    let conversion = if args.round_counts {
        RateConversion::RoundedCounts
    } else {
        RateConversion::Exact
    };
    let (arms, notes) = doc.arms(conversion)?;
    let adm = doc.admissibility()?;
    let cfg = doc.decision(args.strategy)?;

    let mut report = DecisionReport {
        schema: "umet-decision/1".into(),
        conversion: match conversion {
            RateConversion::Exact => "exact".into(),
            RateConversion::RoundedCounts => "rounded-counts".into(),
        },
        strategy: match args.strategy {
            Strategy::Sequential => "sequential".into(),
            Strategy::Pairwise => "pairwise".into(),
        },
        doses: arms
            .iter()
            .map(|a| DoseEcho {
                label: a.label.clone(),
                level: a.level,
                n: a.n,
                n_tox: a.n_tox(),
                n_eff: a.n_eff(),
                n_bio: a.n_bio(),
            })
            .collect(),
        reconstruction_notes: notes.clone(),
        methods: Vec::new(),
    };

    for note in &notes {
        writeln!(out, "note: {note}")?;
    }

    let mut all_selected = true;

    // Metric-driven methods share one runner.
    let mut run_metric = |name: &str, metric: Metric, report: &mut DecisionReport, out: &mut dyn std::io::Write| -> Result<bool> {
        writeln!(out, "\n== {name} ({}) ==", report.strategy)?;
        match args.strategy {
            Strategy::Sequential => {
                let res = sequential_select(&arms, &metric, &cfg, &adm)?;
                print_sequential(out, &res, &cfg)?;
                let selected = res.selected.is_some();
                report.methods.push(sequential_method_report(name, &res, &arms));
                Ok(selected)
            }
            Strategy::Pairwise => {
                let res = pairwise_matrix(&arms, &metric, &cfg, &adm)?;
                print_pairwise(out, &res, &arms)?;
                let selected = res.recommended.is_some();
                report.methods.push(pairwise_method_report(name, &res, &arms));
                Ok(selected)
            }
        }
    };

    if args.method.wants(MethodChoice::Umet) {
        let metric = match (doc.utility3()?, doc.utility2()?) {
            (Some(t3), _) if arms.iter().all(|a| a.joint3().is_some()) => Metric::Utility3(t3),
            (_, Some(t2)) => Metric::Utility2(t2),
            (Some(_), None) => bail!(
                "utility3 configured but some dose lacks three-endpoint data, and no utility2 fallback given"
            ),
            (None, None) => bail!("--method umet requested but methods.umet is not configured"),
        };
        all_selected &= run_metric("U-MET-m", metric, &mut report, out)?;
    }

    if args.method.wants(MethodChoice::Cui) {
        let Some(w) = doc.cui_weights()? else {
            if args.method == MethodChoice::Cui {
                bail!("--method cui requested but methods.cui is not configured");
            }
            // method all: silently skip unconfigured methods
            return finish(args, &report, all_selected, out);
        };
        all_selected &= run_metric("CUI-MET", Metric::Cui(w), &mut report, out)?;
    }

    if args.method.wants(MethodChoice::Empirical) {
        match doc.empirical()? {
            Some((thr, screen)) => {
                writeln!(out, "\n== empirical design (sequential) ==")?;
                let candidates: Vec<usize> = if screen {
                    let (keep, verdicts) = umet_core::decision::admissible_set(&arms, &adm)?;
                    for v in &verdicts {
                        if !v.admissible() {
                            writeln!(out, "screened out: {}", v.label)?;
                        }
                    }
                    keep
                } else {
                    (0..arms.len()).collect()
                };
                let mreport = run_empirical(&arms, &candidates, &thr, out)?;
                all_selected &= mreport.selected.is_some();
                report.methods.push(mreport);
            }
            None if args.method == MethodChoice::Empirical => {
                bail!("--method empirical requested but methods.empirical is not configured")
            }
            None => {}
        }
    }

    finish(args, &report, all_selected, out)
}

fn finish(
    args: &DecideArgs,
    report: &DecisionReport,
    all_selected: bool,
    out: &mut impl std::io::Write,
) -> Result<bool> {
    writeln!(out)?;
    for m in &report.methods {
        match (&m.selected, &m.recommended) {
            (Some(sel), _) => writeln!(out, "{}: selected {}", m.method, sel)?,
            (None, Some(rec)) => writeln!(out, "{}: recommended {}", m.method, rec)?,
            (None, None) if m.unresolved_consider => {
                writeln!(out, "{}: unresolved consider zone (report policy)", m.method)?
            }
            (None, None) => writeln!(out, "{}: no dose selectable", m.method)?,
        }
    }
    if let Some(path) = &args.json_out {
        let text = serde_json::to_string_pretty(report).context("serializing decision report")?;
        if path.as_os_str() == "-" {
            writeln!(out, "{text}")?;
        } else {
            std::fs::write(path, text)
                .with_context(|| format!("writing report to {}", path.display()))?;
        }
    }
    Ok(all_selected)
}

fn print_sequential(
    out: &mut dyn std::io::Write,
    res: &umet_core::decision::SequentialOutcome,
    cfg: &umet_core::decision::DecisionConfig,
) -> Result<()> {
    for v in &res.trace.verdicts {
        if !v.admissible() {
            let reason = match (v.toxic, v.futile) {
                (true, true) => "toxic and futile",
                (true, false) => "toxic",
                _ => "futile",
            };
            writeln!(
                out,
                "inadmissible: {} ({reason}; Pr(tox>limit)={:.3}, Pr(eff<floor)={:.3})",
                v.label, v.p_toxic, v.p_futile
            )?;
        }
    }
    let mut ranking: Vec<_> = res.trace.arms.iter().collect();
    ranking.sort_by(|a, b| b.posterior_mean.partial_cmp(&a.posterior_mean).unwrap().then(a.level.cmp(&b.level)));
    let ranked: Vec<String> = ranking
        .iter()
        .map(|a| format!("{} ({:.3})", a.label, a.posterior_mean))
        .collect();
    if !ranked.is_empty() {
        writeln!(out, "desirability ranking: {}", ranked.join(" > "))?;
    }
    for r in &res.trace.removed {
        writeln!(out, "removes {r} from comparison")?;
    }
    for (i, s) in res.trace.steps.iter().enumerate() {
        writeln!(
            out,
            "step {}: {} vs {}: diff {:.1}, Pr(diff>{}) = {:.3} {} C1={:.3} -> {}",
            i + 1,
            s.low_label,
            s.high_label,
            s.scaled_diff,
            cfg.delta,
            s.probability,
            if s.stopped { "<=" } else { ">" },
            cfg.c1(),
            if s.stopped { "select low dose" } else { "continue" },
        )?;
    }
    Ok(())
}

fn print_pairwise(
    out: &mut dyn std::io::Write,
    res: &umet_core::decision::PairwiseOutcome,
    arms: &[ArmData],
) -> Result<()> {
    for v in &res.verdicts {
        if !v.admissible() {
            writeln!(out, "inadmissible: {}", v.label)?;
        }
    }
    for c in &res.cells {
        writeln!(
            out,
            "{} vs {}: diff {:.1}, Pr = {:.3}, zone {}{}",
            arms[c.low_index].label,
            arms[c.high_index].label,
            c.scaled_diff,
            c.probability,
            zone_code(c.zone),
            if c.rank_inverted { " (high dose ranks below low)" } else { "" },
        )?;
    }
    match res.recommended {
        Some(i) => writeln!(out, "recommended: {}", arms[i].label)?,
        None if res.unresolved_consider => {
            writeln!(out, "recommendation withheld: consider zone unresolved under report policy")?
        }
        None => writeln!(out, "recommended: none")?,
    }
    Ok(())
}

fn pairwise_method_report(
    name: &str,
    res: &umet_core::decision::PairwiseOutcome,
    arms: &[ArmData],
) -> MethodReport {
    MethodReport {
        method: name.to_string(),
        admissibility: res
            .verdicts
            .iter()
            .map(|v| VerdictReport {
                label: v.label.clone(),
                admissible: v.admissible(),
                toxic: v.toxic,
                futile: v.futile,
                p_toxic: v.p_toxic,
                p_futile: v.p_futile,
            })
            .collect(),
        removed_from_comparison: Vec::new(),
        arms: res
            .arms
            .iter()
            .map(|a| ArmReport {
                label: a.label.clone(),
                quasi_events: a.quasi_events,
                posterior_alpha: a.posterior.alpha,
                posterior_beta: a.posterior.beta,
                observed_scaled: a.observed_scaled,
                posterior_mean: a.posterior_mean,
            })
            .collect(),
        steps: res
            .cells
            .iter()
            .map(|c| StepReport {
                high: arms[c.high_index].label.clone(),
                low: arms[c.low_index].label.clone(),
                scaled_diff: c.scaled_diff,
                probability: c.probability,
                zone: zone_code(c.zone),
                stopped: false,
            })
            .collect(),
        selected: None,
        recommended: res.recommended.map(|i| arms[i].label.clone()),
        unresolved_consider: res.unresolved_consider,
    }
}

fn run_empirical(
    arms: &[ArmData],
    candidates: &[usize],
    thr: &umet_core::empirical::EmpiricalThresholds,
    out: &mut dyn std::io::Write,
) -> Result<MethodReport> {
    let mut report = MethodReport {
        method: "empirical".into(),
        admissibility: Vec::new(),
        removed_from_comparison: Vec::new(),
        arms: Vec::new(),
        steps: Vec::new(),
        selected: None,
        recommended: None,
        unresolved_consider: false,
    };
    if candidates.is_empty() {
        writeln!(out, "no doses available")?;
        return Ok(report);
    }
    if candidates.len() == 1 {
        let label = arms[candidates[0]].label.clone();
        writeln!(out, "single dose {label}: selected by default")?;
        report.selected = Some(label);
        return Ok(report);
    }
    let emp_arms: Vec<EmpiricalArm> = candidates
        .iter()
        .map(|&i| {
            Ok(EmpiricalArm {
                label: arms[i].label.clone(),
                level: arms[i].level,
                rates: arms[i].observed_rates()?,
            })
        })
        .collect::<Result<_>>()?;
    let res = empirical_sequential(&emp_arms, thr)?;
    for (i, s) in res.steps.iter().enumerate() {
        let cell = match s.cell {
            EmpiricalCell::High => "High",
            EmpiricalCell::Low => "Low",
            EmpiricalCell::Consider { starred: true } => "Consider*",
            EmpiricalCell::Consider { starred: false } => "Consider",
        };
        let resolved = match s.resolved {
            ResolvedCell::High => "high",
            ResolvedCell::Low => "low",
            ResolvedCell::Consider => "consider (unresolved)",
        };
        writeln!(
            out,
            "step {}: {} vs {}: ED {:.0}%, TR {}{}, cell {cell} -> {resolved}{}",
            i + 1,
            s.low_label,
            s.high_label,
            100.0 * s.ed,
            format_tr(s.tr),
            s.bd.map(|b| format!(", BD {:.2}", b)).unwrap_or_default(),
            if s.stopped { " (stop)" } else { "" },
        )?;
        report.steps.push(StepReport {
            high: s.high_label.clone(),
            low: s.low_label.clone(),
            scaled_diff: 100.0 * s.ed,
            probability: s.tr,
            zone: match s.resolved {
                ResolvedCell::High => "H".into(),
                ResolvedCell::Low => "L".into(),
                ResolvedCell::Consider => "C".into(),
            },
            stopped: s.stopped,
        });
    }
    match res.selected {
        Some(local) => {
            report.selected = Some(emp_arms[local].label.clone());
        }
        None => {
            report.unresolved_consider = true;
            writeln!(out, "stops unresolved: consider cell under report policy")?;
        }
    }
    Ok(report)
}

fn format_tr(tr: f64) -> String {
    if tr.is_infinite() {
        "inf".into()
    } else {
        format!("{tr:.2}")
    }
}
