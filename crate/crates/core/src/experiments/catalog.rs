//! Built-in test functions.

use crate::piecewise::{PiecewisePowerFunction, PowerPiece};

/// A named exact test function.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub f: PiecewisePowerFunction,
}

fn entry(name: &'static str, pieces: Vec<PowerPiece>) -> CatalogEntry {
    CatalogEntry {
        name,
        f: PiecewisePowerFunction::new(pieces).expect("catalog pieces are valid"),
    }
}

/// Twenty piecewise power functions. Every entry lies in `L^p` for
/// `1.5 <= p <= 4`: singular exponents are `>= -0.2` and exponents on
/// unbounded pieces are `<= -0.75`.
pub fn catalog() -> Vec<CatalogEntry> {
    let c = PowerPiece::constant;
    let pw = PowerPiece::new;
    let inf = f64::INFINITY;
    vec![
        entry("indicator (0,1)", vec![c(0.0, 1.0, 1.0)]),
        entry("indicator (-1,1)", vec![c(-1.0, 1.0, 1.0)]),
        entry("annulus t=0", vec![c(-1.0, -0.5, 1.0), c(0.5, 1.0, 1.0)]),
        entry("annulus t=1", vec![c(-2.0, -1.0, 1.0), c(1.0, 2.0, 1.0)]),
        entry(
            "annuli t=0 and t=2",
            vec![c(-4.0, -2.0, 1.0), c(-1.0, -0.5, 1.0), c(0.5, 1.0, 1.0), c(2.0, 4.0, 1.0)],
        ),
        entry("two steps", vec![c(-3.0, -1.0, 2.0), c(0.25, 0.75, 0.5)]),
        entry("|x|^-0.2 on (0,1)", vec![pw(0.0, 1.0, 1.0, -0.2)]),
        entry("|x|^-0.2 on (-1,1)", vec![pw(-1.0, 0.0, 1.0, -0.2), pw(0.0, 1.0, 1.0, -0.2)]),
        entry("|x|^0.5 on (0,2)", vec![pw(0.0, 2.0, 1.0, 0.5)]),
        entry("x^2 on (-1,1)", vec![pw(-1.0, 1.0, 1.0, 2.0)]),
        entry(
            "f_3 = |x|^-0.5 on 1<|x|<8",
            vec![pw(-8.0, -1.0, 1.0, -0.5), pw(1.0, 8.0, 1.0, -0.5)],
        ),
        entry("|x|^-1 on (1,inf)", vec![pw(1.0, inf, 1.0, -1.0)]),
        entry("|x|^-0.75 on (2,inf)", vec![pw(2.0, inf, 1.0, -0.75)]),
        entry("mixed power and step", vec![c(-2.0, -1.0, 1.0), pw(0.5, 4.0, 3.0, -0.1)]),
        entry("staircase", vec![c(0.0, 1.0, 1.0), c(1.0, 2.0, 2.0), c(2.0, 3.0, 3.0)]),
        entry("|x|^0.3 then flat", vec![pw(0.0, 1.0, 1.0, 0.3), c(1.0, 3.0, 1.0)]),
        entry("dilated annulus t=-1", vec![c(-0.5, -0.25, 1.0), c(0.25, 0.5, 1.0)]),
        entry(
            "asymmetric singular pair",
            vec![pw(-0.5, 0.0, 2.0, -0.15), pw(0.0, 0.5, 1.0, -0.15)],
        ),
        entry("flat core with |x|^-2 tail", vec![c(-1.0, 1.0, 1.0), pw(1.0, inf, 1.0, -2.0)]),
        entry("small far bump", vec![c(100.0, 200.0, 1e-3)]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Measure;
    use crate::norms::lp_norm;

    #[test]
    fn twenty_entries_in_lp() {
        let cat = catalog();
        assert_eq!(cat.len(), 20);
        let leb = Measure::lebesgue(1).unwrap();
        for e in &cat {
            for p in [1.5, 2.0, 4.0] {
                let v = lp_norm(&e.f, &leb, p).unwrap();
                assert!(v.is_finite() && v > 0.0, "{} p={p}", e.name);
            }
        }
    }
}
