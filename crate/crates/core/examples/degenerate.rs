//! Models without the net profit condition and deterministic critical
//! models, which are answered without root finding.

use seasonal_ruin::{survival_ultimate, IntegerPmf, SeasonalModel};

fn main() -> seasonal_ruin::Result<()> {
    let cases: [(&str, Vec<Vec<f64>>); 4] = [
        ("supercritical", vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0]]),
        (
            "critical, random",
            vec![vec![0.5, 0.0, 0.5], vec![0.25, 0.5, 0.25]],
        ),
        (
            "critical, deterministic",
            vec![vec![1.0], vec![0.0, 0.0, 1.0]],
        ),
        (
            "critical, deterministic",
            vec![vec![0.0, 0.0, 1.0], vec![1.0]],
        ),
    ];
    for (label, tables) in cases {
        let claims = tables
            .iter()
            .map(|t| IntegerPmf::from_table(t))
            .collect::<Result<Vec<_>, _>>()?;
        let model = SeasonalModel::new(claims)?;
        let table = survival_ultimate(&model, 4)?;
        println!("{label:<24} {:?} phi = {:?}", model.classify(), table.phi);
    }
    Ok(())
}
