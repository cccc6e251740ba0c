//! Development probe: print selection distributions for the reproduction
//! suites next to the published percent-correct values.

use umet_core::sim::presets::{published, scenarios, PresetId, Regime};
use umet_core::sim::{operating_characteristics, MethodKind};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let preset = PresetId::parse(args.get(1).map(|s| s.as_str()).unwrap_or("T7")).unwrap();
    let regime = Regime::parse(args.get(2).map(|s| s.as_str()).unwrap_or("r2")).unwrap();
    let reps: u32 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let seed: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(20240111);

    let specs = scenarios(preset, regime, seed, reps);
    let rows = published(preset, regime);
    for (spec, row) in specs.iter().zip(rows) {
        let oc = operating_characteristics(spec, None).unwrap();
        print!("{}:", spec.name);
        for m in &oc.methods {
            let pub_pct = match m.method {
                MethodKind::Empirical => row.pct_emp,
                MethodKind::Umet => row.pct_umet,
                MethodKind::Cui => row.pct_cui,
            };
            let truth = m.truth.map(|t| t + 1).unwrap_or(0);
            let dist: Vec<String> =
                m.fraction.iter().map(|f| format!("{:.0}", 100.0 * f)).collect();
            print!(
                "  {}[truth d{} correct {:.1}% pub {:?} dist {} none {:.0}]",
                m.method.label(),
                truth,
                100.0 * m.pct_correct,
                pub_pct,
                dist.join("/"),
                100.0 * m.fraction_none,
            );
        }
        println!();
    }
}
