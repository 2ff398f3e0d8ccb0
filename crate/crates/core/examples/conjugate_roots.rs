//! Three Poisson seasons whose characteristic equation has a complex
//! conjugate pair inside the unit disk. Shows how the pair becomes real rows
//! of the initial-value system.

use seasonal_ruin::initvals;
use seasonal_ruin::pmf::DEFAULT_EPS_TAIL;
use seasonal_ruin::survival::{self, SolverConfig};
use seasonal_ruin::{IntegerPmf, SeasonalModel};

fn main() -> seasonal_ruin::Result<()> {
    let model = SeasonalModel::new(
        [0.5, 2.0 / 3.0, 0.8]
            .iter()
            .map(|&l| IntegerPmf::poisson(l, DEFAULT_EPS_TAIL))
            .collect::<Result<_, _>>()?,
    )?;

    let sol = survival::solve_ultimate(&model, 6, &SolverConfig::default())?;
    for r in sol.roots.as_ref().unwrap().roots() {
        println!("root {:+.6} {:+.6}i", r.value.re, r.value.im);
    }
    let system = sol.system.as_ref().unwrap();
    for (row, prov) in system.row_provenance.iter().enumerate() {
        let cells: Vec<String> = system
            .matrix
            .row(row)
            .iter()
            .map(|x| format!("{x:>10.6}"))
            .collect();
        println!("{} | {:>8.6}   {prov:?}", cells.join(" "), system.rhs[row]);
    }
    let m0 = sol.initial.as_ref().unwrap();
    println!("m0 = {:?}", m0.m0);
    println!(
        "mass identity defect {:.1e}",
        m0.mass_identity_defect(&model)
    );

    let (a, b) = initvals::complex_initial_system(&model, sol.roots.as_ref().unwrap())?;
    println!(
        "complex form: {}x{} matrix, rhs {:?}",
        a.nrows(),
        a.ncols(),
        b.as_slice()
    );

    println!("phi = {:?}", sol.table.phi);
    Ok(())
}
