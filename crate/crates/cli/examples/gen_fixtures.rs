//! Regenerates `fixtures/toy`: the bundled three-node instance as a data
//! directory, two run manifests (explicit tables and sampled series), and
//! one year of synthetic hourly history per node.
//!
//! Usage: cargo run -p hydra-cli --example gen_fixtures [-- <repo_root>]

use hydra_core::scenario::SplitMix64;
use hydra_core::synthetic::{bundled_toy, write_data_dir};
use hydra_core::table::write_csv;
use std::path::PathBuf;

fn main() {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../.."));
    let toy = root.join("fixtures/toy");
    std::fs::create_dir_all(&toy).unwrap();

    let (dims, params) = bundled_toy::<f64>();
    write_data_dir(&dims, &params, &toy.join("data")).unwrap();

    // One year of synthetic hourly history per node: a diurnal shape with
    // deterministic pseudo-noise.
    let series = toy.join("series");
    let hours = 8760usize;
    let diurnal = |h: usize, amp: f64, base: f64| -> f64 {
        let t = (h % 24) as f64 / 24.0 * std::f64::consts::TAU;
        base + amp * (1.0 + (t - std::f64::consts::PI).cos()) / 2.0
    };
    let noise = |rng: &mut SplitMix64| rng.next_u64() as f64 / u64::MAX as f64;

    for (node, peak) in [("NOR", 300.0), ("ESP", 240.0), ("DEU", 1050.0)] {
        let mut rng = SplitMix64::new(0xD0_0D + peak as u64);
        let rows: Vec<Vec<String>> = (0..hours)
            .map(|h| {
                let v = diurnal(h, 0.35 * peak, 0.65 * peak) * (0.9 + 0.2 * noise(&mut rng));
                vec![h.to_string(), format!("{v:.6e}"), "MW".to_string()]
            })
            .collect();
        let dir = series.join("load_power");
        std::fs::create_dir_all(&dir).unwrap();
        write_csv(&dir.join(format!("{node}.csv")), &["hour", "value", "unit"], &rows).unwrap();
    }

    for (node, lo, hi) in [("NOR", 0.08f64, 0.25f64), ("ESP", 0.25, 0.65), ("DEU", 0.15, 0.45)] {
        let mut rng = SplitMix64::new(0xF1A9 + node.len() as u64 * 7 + lo.to_bits() % 97);
        let mut level: f64 = (lo + hi) / 2.0;
        let rows: Vec<Vec<String>> = (0..hours)
            .map(|h| {
                // Mean-reverting walk keeps wind plausible and in range.
                let step = (noise(&mut rng) - 0.5) * 0.2 * (hi - lo);
                level = (level + step).clamp(lo, hi);
                let _ = h;
                vec![h.to_string(), format!("{level:.6e}"), "fraction".to_string()]
            })
            .collect();
        let dir = series.join("availability_wind");
        std::fs::create_dir_all(&dir).unwrap();
        write_csv(&dir.join(format!("{node}.csv")), &["hour", "value", "unit"], &rows).unwrap();
    }

    {
        let mut rng = SplitMix64::new(0x1CE);
        let rows: Vec<Vec<String>> = (0..hours)
            .map(|h| {
                // Inflow energy per hour: spring melt bump plus noise.
                let season = (h as f64 / 8760.0 * std::f64::consts::TAU).sin().max(0.0);
                let v = 250.0 + 420.0 * season + 120.0 * noise(&mut rng);
                vec![h.to_string(), format!("{v:.6e}"), "MWh".to_string()]
            })
            .collect();
        let dir = series.join("inflow_hydro_res");
        std::fs::create_dir_all(&dir).unwrap();
        write_csv(&dir.join("NOR.csv"), &["hour", "value", "unit"], &rows).unwrap();
    }

    let manifest = "\
# Bundled toy system: NOR (exempt, hydro and gas exports), ESP (windy),
# DEU (demand center). Two 3-year periods, two scenarios, one 24-hour season.
data_dir data
out_dir out

time {
  periods 2
  period_length_years 3
  scenarios 2
  season day 24 8760
}

cases Base AST90

solver {
  kind embedded
}
";
    std::fs::write(toy.join("run.manifest"), manifest).unwrap();

    let manifest_sampled = "\
# Same system, operational data sampled from the hourly history instead of
# the explicit demand/availability tables.
data_dir data
out_dir out_sampled

time {
  periods 2
  period_length_years 3
  scenarios 2
  season day 24 8760
}

cases Base AST90

solver {
  kind embedded
}

sample {
  series_dir series
  seed 42
}
";
    std::fs::write(toy.join("run_sampled.manifest"), manifest_sampled).unwrap();

    let manifest_all = "\
# All six policy cases on the bundled system.
data_dir data
out_dir out_all

time {
  periods 2
  period_length_years 3
  scenarios 2
  season day 24 8760
}

cases Base AST90 ST90 AT90 AS90 AST

solver {
  kind embedded
}
";
    std::fs::write(toy.join("run_all_cases.manifest"), manifest_all).unwrap();

    println!("fixtures written under {}", toy.display());
}
