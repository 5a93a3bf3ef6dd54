//! Writes a deterministic 517-row stand-in for the Montesinho forest-fire file.
//!
//! Same 13-column layout, same month histogram and zero-area count as the
//! public dataset; codes follow a seasonal dryness curve. Five fixed rows with
//! known classifications are embedded verbatim.
//!
//! cargo run -p firedss --example synth_dataset -- data/montesinho_synthetic.csv

use std::fmt::Write as _;

use firedss::fwi;
use firedss::ingest::{COLUMNS, DAYS, MONTHS};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MONTH_COUNTS: [(&str, usize); 12] = [
    ("jan", 2),
    ("feb", 20),
    ("mar", 54),
    ("apr", 9),
    ("may", 2),
    ("jun", 17),
    ("jul", 32),
    ("aug", 184),
    ("sep", 172),
    ("oct", 15),
    ("nov", 1),
    ("dec", 9),
];
const ZERO_AREA_ROWS: usize = 247;

const FIXED_ROWS: [&str; 5] = [
    "8,6,aug,mon,92.3,88.9,495.6,8.5,24.1,27,3.1,0.0,0.0",
    "1,4,aug,sat,94.4,146.0,614.7,11.3,25.6,42,4.0,0.0,0.0",
    "7,4,aug,sun,81.6,56.7,665.6,1.9,21.2,70,6.7,0.0,11.16",
    "2,4,aug,sun,81.6,56.7,665.6,1.9,21.9,71,5.8,0.0,54.29",
    "4,3,aug,sun,81.6,56.7,665.6,1.9,27.8,32,2.7,0.0,6.44",
];

const DRYNESS: [f64; 12] = [
    0.1, 0.2, 0.35, 0.4, 0.5, 0.65, 0.8, 0.95, 0.9, 0.6, 0.2, 0.1,
];

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one draw is plenty here.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn round(v: f64, places: i32) -> f64 {
    let p = 10f64.powi(places);
    (v * p).round() / p
}

fn synth_row(rng: &mut ChaCha8Rng, month: usize, zero_area: bool) -> String {
    let s = DRYNESS[month];
    let temp = round((4.0 + 24.0 * s + 3.0 * normal(rng)).clamp(2.2, 33.3), 1);
    let rh = (75.0 - 35.0 * s - 0.6 * (temp - 18.0) + 10.0 * normal(rng))
        .clamp(15.0, 100.0)
        .round();
    let wind = round((4.0 + 1.8 * normal(rng)).clamp(0.4, 9.4), 1);
    let rain_p = if rh > 80.0 { 0.25 } else { 0.01 };
    let rain = if rng.gen_bool(rain_p) {
        round(rng.gen_range(0.2..6.4), 1)
    } else {
        0.0
    };
    let ffmc = round(
        (70.0 + 24.0 * s - 0.08 * (rh - 45.0) + 3.0 * normal(rng)).clamp(18.7, 96.2),
        1,
    );
    let dmc = round(
        (10.0 + 170.0 * s.powf(1.5) + 20.0 * normal(rng)).clamp(1.1, 291.3),
        1,
    );
    let dc = round(
        (20.0 + 720.0 * s * s + 60.0 * normal(rng)).clamp(7.9, 860.6),
        1,
    );
    let isi = round(fwi::isi(ffmc, wind * 3.6).expect("valid ffmc").min(56.1), 1);
    let area = if zero_area {
        0.0
    } else {
        round(
            (0.5 + 2.0 * s - 0.02 * (rh - 45.0) + 1.3 * normal(rng)).exp(),
            2,
        )
    };
    let x = rng.gen_range(1..=9);
    let y = rng.gen_range(2..=9);
    let day = DAYS[rng.gen_range(0..7)];
    format!(
        "{x},{y},{},{day},{ffmc:.1},{dmc:.1},{dc:.1},{isi:.1},{temp:.1},{rh},{wind:.1},{rain:.1},{area}",
        MONTHS[month]
    )
}

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/montesinho_synthetic.csv".to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(517);

    let mut months = Vec::new();
    for (i, (name, count)) in MONTH_COUNTS.iter().enumerate() {
        assert_eq!(MONTHS[i], *name);
        // The fixed rows are all August.
        let n = if *name == "aug" {
            count - FIXED_ROWS.len()
        } else {
            *count
        };
        months.extend(std::iter::repeat_n(i, n));
    }
    let fixed_zero = FIXED_ROWS.iter().filter(|r| r.ends_with(",0.0")).count();
    let mut zero = vec![false; months.len()];
    for z in zero.iter_mut().take(ZERO_AREA_ROWS - fixed_zero) {
        *z = true;
    }
    zero.shuffle(&mut rng);

    let mut rows: Vec<String> = months
        .iter()
        .zip(&zero)
        .map(|(&m, &z)| synth_row(&mut rng, m, z))
        .collect();
    rows.extend(FIXED_ROWS.iter().map(|r| r.to_string()));
    rows.shuffle(&mut rng);

    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in &rows {
        let _ = writeln!(out, "{r}");
    }
    std::fs::write(&path, out).expect("write dataset");
    eprintln!("wrote {} rows to {path}", rows.len());
}
