//! Text renderings: six-significant-digit numbers, comparison reports,
//! plot-data files and theory tables.

use std::fmt::Write as _;

use cliqueweight::analysis::{ComparisonReport, KindReport, SlopeFit, WeightKind};
use cliqueweight::oracle::OracleCheck;
use cliqueweight::theory::{self, DerivedConstants, HypothesisWarning};

/// `%g`-style formatting with six significant digits.
pub fn g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Take the exponent after rounding, so 999999.5 becomes 1e+06.
    let sci = format!("{x:.5e}");
    let (mantissa, e) = sci.split_once('e').expect("exponent present");
    let e: i32 = e.parse().expect("integer exponent");
    if !(-4..6).contains(&e) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs());
    }
    let decimals = (5 - e).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(g6).unwrap_or_else(|| "nan".into())
}

fn slope_text(fit: &Option<SlopeFit>) -> String {
    match fit {
        Some(f) => format!(
            "{} over [{}, {}] ({} points, rms residual {})",
            g6(f.slope),
            f.window.0,
            f.window.1,
            f.points,
            g6(f.residual)
        ),
        None => "unavailable".into(),
    }
}

pub fn constants_block(c: &DerivedConstants) -> String {
    let mut out = String::new();
    writeln!(out, "constants").unwrap();
    for (name, v) in [
        ("alpha", c.alpha),
        ("beta", c.beta),
        ("a", c.a),
        ("b", c.b),
        ("h", c.h),
        ("A", c.edge_growth),
        ("B", c.clique_growth),
    ] {
        writeln!(out, "  {name:<6} {}", g6(v)).unwrap();
    }
    writeln!(out, "exponents").unwrap();
    for (name, v) in [
        ("vertex", c.vertex_exponent),
        ("edge", c.edge_exponent),
        ("clique", c.clique_exponent),
    ] {
        writeln!(out, "  {name:<6} {}", g6(v)).unwrap();
    }
    out
}

fn warnings_block(out: &mut String, warnings: &[HypothesisWarning]) {
    if warnings.is_empty() {
        writeln!(out, "warnings: none").unwrap();
    } else {
        writeln!(out, "warnings").unwrap();
        for w in warnings {
            writeln!(out, "  {w}").unwrap();
        }
    }
}

fn kind_label(kind: WeightKind, n_model: usize) -> &'static str {
    match kind {
        WeightKind::Vertex => "vertex weights",
        WeightKind::Edge => "edge weights",
        WeightKind::Clique if n_model == 3 => "triangle weights",
        WeightKind::Clique => "top-clique weights",
        WeightKind::Degree => "degrees",
    }
}

/// Human-readable comparison report.
pub fn comparison_text(rep: &ComparisonReport, rows_shown: u64) -> String {
    let p = &rep.params;
    let mut out = String::new();
    writeln!(
        out,
        "comparison N={} p={} q={} r={} replications={} n={}",
        p.n_model,
        g6(p.p),
        g6(p.q),
        g6(p.r),
        rep.replications,
        rep.final_n
    )
    .unwrap();
    out.push_str(&constants_block(&rep.constants));
    warnings_block(&mut out, &rep.warnings);

    writeln!(
        out,
        "convergence (targets V/n {} E/n {} K/n {})",
        g6(rep.targets.0),
        g6(rep.targets.1),
        g6(rep.targets.2)
    )
    .unwrap();
    writeln!(
        out,
        "  {:>12} {:>12} {:>12} {:>12}",
        "n", "V/n", "E/n", "K/n"
    )
    .unwrap();
    for row in &rep.convergence {
        writeln!(
            out,
            "  {:>12} {:>12} {:>12} {:>12}",
            row.n,
            g6(row.vertices_per_step),
            g6(row.edges_per_step),
            g6(row.cliques_per_step)
        )
        .unwrap();
    }

    writeln!(
        out,
        "sup gaps over indices {}..{}",
        rep.options.gap_range.0, rep.options.gap_range.1
    )
    .unwrap();
    writeln!(
        out,
        "  {:>12} {:>12} {:>12} {:>12}",
        "n", "vertex", "edge", "clique"
    )
    .unwrap();
    for row in &rep.sup_gaps {
        writeln!(
            out,
            "  {:>12} {:>12} {:>12} {:>12}",
            row.n,
            opt(row.vertex),
            opt(row.edge),
            opt(row.clique)
        )
        .unwrap();
    }

    for k in &rep.kinds {
        kind_text(&mut out, k, p.n_model, rows_shown);
    }
    out
}

fn kind_text(out: &mut String, k: &KindReport, n_model: usize, rows_shown: u64) {
    writeln!(out, "{}", kind_label(k.kind, n_model)).unwrap();
    writeln!(out, "  sup gap          {}", opt(k.sup_gap)).unwrap();
    writeln!(out, "  overflow         {}", g6(k.overflow_fraction)).unwrap();
    writeln!(out, "  empirical slope  {}", slope_text(&k.empirical_slope)).unwrap();
    writeln!(out, "  reference slope  {}", slope_text(&k.reference_slope)).unwrap();
    writeln!(out, "  asymptotic slope {}", opt(k.asymptotic_slope)).unwrap();
    writeln!(
        out,
        "  {:>8} {:>12} {:>12} {:>12}",
        "index", "empirical", "theoretical", "gap"
    )
    .unwrap();
    for row in k.rows.iter().filter(|r| r.index <= rows_shown) {
        writeln!(
            out,
            "  {:>8} {:>12} {:>12} {:>12}",
            row.index,
            g6(row.empirical),
            opt(row.theoretical),
            opt(row.gap)
        )
        .unwrap();
    }
}

/// Plot-data file name for a kind.
pub fn plot_file(kind: WeightKind, n_model: usize) -> &'static str {
    match kind {
        WeightKind::Degree => "degrees.dat",
        WeightKind::Vertex => "vertex_weights.dat",
        WeightKind::Edge => "edge_weights.dat",
        WeightKind::Clique if n_model == 3 => "triangle_weights.dat",
        WeightKind::Clique => "clique_weights.dat",
    }
}

/// Whitespace-separated columns with `#` headers. Degrees have no
/// theoretical column.
pub fn plot_data(rep: &ComparisonReport, k: &KindReport) -> String {
    let p = &rep.params;
    let mut out = String::new();
    writeln!(
        out,
        "# {} N={} p={} q={} r={} n={} replications={}",
        kind_label(k.kind, p.n_model),
        p.n_model,
        g6(p.p),
        g6(p.q),
        g6(p.r),
        rep.final_n,
        rep.replications
    )
    .unwrap();
    if let Some(s) = &k.reference_slope {
        writeln!(
            out,
            "# reference slope {} over [{}, {}]",
            g6(s.slope),
            s.window.0,
            s.window.1
        )
        .unwrap();
    }
    if let Some(a) = k.asymptotic_slope {
        writeln!(out, "# asymptotic slope {}", g6(a)).unwrap();
    }
    if k.kind == WeightKind::Degree {
        writeln!(out, "# index empirical").unwrap();
        for row in &k.rows {
            writeln!(out, "{} {}", row.index, g6(row.empirical)).unwrap();
        }
    } else {
        writeln!(out, "# index empirical theoretical").unwrap();
        for row in &k.rows {
            writeln!(
                out,
                "{} {} {}",
                row.index,
                g6(row.empirical),
                opt(row.theoretical)
            )
            .unwrap();
        }
    }
    out
}

/// Theory tables for `(p, q, r)` up to `max_index`.
pub fn theory_text(
    n_model: usize,
    c: &DerivedConstants,
    warnings: &[HypothesisWarning],
    max_index: usize,
) -> String {
    let x = theory::vertex_weight_dist(c, max_index);
    let u = theory::edge_weight_dist(c, max_index);
    let e = theory::edge_rate_dist(c, max_index);
    let t = theory::clique_weight_dist(c, max_index);
    let k = theory::clique_rate_dist(c, max_index);
    let mut out = format!(
        "theory N={n_model} p={} q={} r={}\n",
        g6(c.p),
        g6(c.q),
        g6(c.r)
    );
    out.push_str(&constants_block(c));
    warnings_block(&mut out, warnings);
    for (name, d) in [("x", &x), ("u", &u), ("t", &t)] {
        if d.degenerate {
            writeln!(out, "degenerate: {name} has all mass at index 1").unwrap();
        }
    }
    writeln!(
        out,
        "partial sums: x {} u {} t {}",
        g6(x.partial_sum()),
        g6(u.partial_sum()),
        g6(t.partial_sum())
    )
    .unwrap();
    writeln!(
        out,
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "index", "x", "u", "e", "t", "k"
    )
    .unwrap();
    for i in 1..=max_index as u64 {
        writeln!(
            out,
            "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
            i,
            g6(x.at(i)),
            g6(u.at(i)),
            g6(e.at(i)),
            g6(t.at(i)),
            g6(k.at(i))
        )
        .unwrap();
    }
    out
}

pub fn oracle_line(c: &OracleCheck) -> String {
    let status = if c.informational {
        "NOTE"
    } else if c.passed {
        "PASS"
    } else {
        "FAIL"
    };
    format!(
        "{status} {:<20} {}: formula {} oracle {} deviation {} tolerance {}",
        c.formula,
        c.subject,
        g6(c.formula_value),
        g6(c.oracle_value),
        g6(c.deviation),
        g6(c.tolerance)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(g6(5.0 / 12.0), "0.416667");
        assert_eq!(g6(1.0 / 3.0), "0.333333");
        assert_eq!(g6(2.5), "2.5");
        assert_eq!(g6(8.0), "8");
        assert_eq!(g6(3.4000000000000004), "3.4");
        assert_eq!(g6(123456789.0), "1.23457e+08");
        assert_eq!(g6(0.000012345678), "1.23457e-05");
        assert_eq!(g6(0.00012345678), "0.000123457");
        assert_eq!(g6(999999.6), "1e+06");
        assert_eq!(g6(-0.75), "-0.75");
        assert_eq!(g6(0.0), "0");
        assert_eq!(g6(f64::NAN), "nan");
        assert_eq!(g6(100000.0), "100000");
    }

    #[test]
    fn theory_table_rows() {
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        let text = theory_text(3, &c, &[], 3);
        let row1 = text
            .lines()
            .find(|l| l.trim_start().starts_with("1 "))
            .unwrap();
        let cols: Vec<&str> = row1.split_whitespace().collect();
        assert_eq!(cols, vec!["1", "0.255319", "0.75", "3", "0.8", "0.6"]);
        assert!(text.contains("alpha  0.416667"));
        assert!(text.contains("beta   2.5"));
        assert!(text.contains("a      0.333333"));
        assert!(text.contains("b      8\n"));
        assert!(text.contains("h      0.25"));
        assert!(text.contains("A      2\n"));
        assert!(text.contains("B      0.75"));
        assert!(text.contains("vertex 3.4"));
        assert!(text.contains("edge   4\n"));
        assert!(text.contains("clique 5\n"));
    }
}
