//! Per-step time series: one CSV row per accepted step, reals with 17 significant digits.

use std::path::Path;

use crate::continuation::AcceptedStep;
use crate::error::IoError;

pub const COLUMNS: [&str; 14] = [
    "g",
    "dt",
    "newton_iters",
    "w_A",
    "w_B",
    "w_C",
    "film_psi_iso",
    "film_psi_vol",
    "film_psi_ani",
    "substrate_psi_iso",
    "substrate_psi_vol",
    "substrate_psi_ani",
    "probe_spread",
    "transverse_spread",
];

/// Shortest round-trip text would vary in length; a fixed exponent form keeps files diffable.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(s: &AcceptedStep) -> Vec<String> {
    let mut r = vec![real(s.g), real(s.dt), s.newton_iters.to_string()];
    r.extend(s.probes.iter().map(|&w| real(w)));
    r.extend(s.energies.iter().map(|&e| real(e)));
    r.push(real(s.history_point().probe_spread()));
    r.push(real(s.transverse_spread));
    r
}

pub fn timeseries_csv(steps: &[AcceptedStep]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for s in steps {
        w.write_record(row(s))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn write_timeseries_csv(path: &Path, steps: &[AcceptedStep]) -> Result<(), IoError> {
    let bytes = timeseries_csv(steps).map_err(|e| IoError::format(path, e.to_string()))?;
    std::fs::write(path, bytes).map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(k: usize) -> AcceptedStep {
        AcceptedStep {
            step: k,
            g: 1e-4 * k as f64,
            dt: 1e-4,
            newton_iters: 2,
            final_residual: 1e-11,
            negative_pivots: 0,
            probes: [0.1, 0.2 / 3.0, -1e-300],
            transverse_spread: 0.0,
            energies: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        }
    }

    #[test]
    fn zero_steps_give_a_header_only_file() {
        let text = String::from_utf8(timeseries_csv(&[]).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end().split(',').count(), COLUMNS.len());
    }

    #[test]
    fn values_survive_a_round_trip() {
        let steps = [step(1), step(2)];
        let bytes = timeseries_csv(&steps).unwrap();
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        for (rec, s) in r.records().zip(&steps) {
            let rec = rec.unwrap();
            assert_eq!(rec.len(), 14);
            assert_eq!(rec[0].parse::<f64>().unwrap(), s.g);
            assert_eq!(rec[4].parse::<f64>().unwrap(), s.probes[1]);
            assert_eq!(rec[5].parse::<f64>().unwrap(), s.probes[2]);
        }
    }
}
