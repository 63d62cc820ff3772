//! Order-based branching, diameter and length ratios and per-generation tables.
//!
//! Ratios follow the usual log-regression convention: fit
//! `log10(quantity) = a + b·order` by unweighted least squares over the
//! distinct orders present and report `10^|b|`.

use std::collections::BTreeMap;

use super::order::{branch_angles, compute_horsfield_orders, compute_strahler_orders};
use super::AirwayTree;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStats {
    pub order: u32,
    pub count: usize,
    /// `None` when any branch of this order lacks a diameter.
    pub mean_diameter: Option<f64>,
    pub mean_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: u32,
    pub count: usize,
    pub mean_diameter: Option<f64>,
    pub std_diameter: Option<f64>,
    pub mean_length: f64,
    pub std_length: f64,
    /// Over branches of this generation that have a parent.
    pub mean_angle: Option<f64>,
    pub std_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphometrySummary {
    pub horsfield: Vec<OrderStats>,
    pub strahler: Vec<OrderStats>,
    pub generations: Vec<GenerationStats>,
    pub rb_h: Option<f64>,
    pub rd_h: Option<f64>,
    pub rl_h: Option<f64>,
    pub rb_s: Option<f64>,
    pub rd_s: Option<f64>,
    pub rl_s: Option<f64>,
    /// Mean/std of parent-child angles over all children of bifurcations.
    pub mean_angle: Option<f64>,
    pub std_angle: Option<f64>,
    pub terminal_count: usize,
    /// Mean/std of child/parent diameter ratio across bifurcations.
    pub diameter_decline_mean: Option<f64>,
    pub diameter_decline_std: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum MorphometryError {
    #[error("ratio undefined: tree has {0} distinct order(s), at least 2 required")]
    RatioUndefined(usize),
}

/// Strict form of [`morphometry`]: fails when branching ratios are undefined.
pub fn morphometry_summary(tree: &AirwayTree) -> Result<MorphometrySummary, MorphometryError> {
    let summary = morphometry(tree);
    if summary.rb_h.is_none() {
        let distinct = summary.horsfield.len().min(summary.strahler.len());
        return Err(MorphometryError::RatioUndefined(distinct));
    }
    Ok(summary)
}

/// All tables and ratios; ratio fields are `None` where undefined.
pub fn morphometry(tree: &AirwayTree) -> MorphometrySummary {
    let horsfield = order_table(tree, &compute_horsfield_orders(tree));
    let strahler = order_table(tree, &compute_strahler_orders(tree));
    let angles = branch_angles(tree);

    let bifurcation_angles: Vec<f64> = tree
        .bifurcations()
        .flat_map(|b| b.children.iter().filter_map(|&c| angles[c]))
        .collect();
    let (mean_angle, std_angle) = mean_std(&bifurcation_angles).unzip();

    let declines: Vec<f64> = tree
        .bifurcations()
        .filter_map(|b| {
            let dp = b.diameter?;
            Some(
                b.children
                    .iter()
                    .filter_map(|&c| tree.branch(c).diameter.map(|dc| dc / dp))
                    .collect::<Vec<_>>(),
            )
        })
        .flatten()
        .collect();
    let (diameter_decline_mean, diameter_decline_std) = mean_std(&declines).unzip();

    let (rb_h, rd_h, rl_h) = ratios(&horsfield);
    let (rb_s, rd_s, rl_s) = ratios(&strahler);

    MorphometrySummary {
        generations: generation_table(tree, &angles),
        horsfield,
        strahler,
        rb_h,
        rd_h,
        rl_h,
        rb_s,
        rd_s,
        rl_s,
        mean_angle,
        std_angle,
        terminal_count: tree.terminals().count(),
        diameter_decline_mean,
        diameter_decline_std,
    }
}

fn order_table(tree: &AirwayTree, orders: &[u32]) -> Vec<OrderStats> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (id, &o) in orders.iter().enumerate() {
        groups.entry(o).or_default().push(id);
    }
    groups
        .into_iter()
        .map(|(order, ids)| {
            let lengths: Vec<f64> = ids.iter().map(|&i| tree.length(i)).collect();
            let diameters: Option<Vec<f64>> =
                ids.iter().map(|&i| tree.branch(i).diameter).collect();
            OrderStats {
                order,
                count: ids.len(),
                mean_diameter: diameters.map(|d| mean(&d)),
                mean_length: mean(&lengths),
            }
        })
        .collect()
}

fn generation_table(tree: &AirwayTree, angles: &[Option<f64>]) -> Vec<GenerationStats> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for b in tree.branches() {
        groups.entry(b.generation).or_default().push(b.id);
    }
    groups
        .into_iter()
        .map(|(generation, ids)| {
            let lengths: Vec<f64> = ids.iter().map(|&i| tree.length(i)).collect();
            let diameters: Option<Vec<f64>> =
                ids.iter().map(|&i| tree.branch(i).diameter).collect();
            let gen_angles: Vec<f64> = ids.iter().filter_map(|&i| angles[i]).collect();
            let (mean_length, std_length) = mean_std(&lengths).expect("nonempty group");
            let (mean_diameter, std_diameter) =
                diameters.as_deref().and_then(mean_std).unzip();
            let (mean_angle, std_angle) = mean_std(&gen_angles).unzip();
            GenerationStats {
                generation,
                count: ids.len(),
                mean_diameter,
                std_diameter,
                mean_length,
                std_length,
                mean_angle,
                std_angle,
            }
        })
        .collect()
}

fn ratios(table: &[OrderStats]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if table.len() < 2 {
        return (None, None, None);
    }
    let orders: Vec<f64> = table.iter().map(|s| s.order as f64).collect();
    let ratio = |values: &[f64]| -> f64 { 10f64.powf(log_slope(&orders, values).abs()) };
    let counts: Vec<f64> = table.iter().map(|s| s.count as f64).collect();
    let lengths: Vec<f64> = table.iter().map(|s| s.mean_length).collect();
    let diameters: Option<Vec<f64>> = table.iter().map(|s| s.mean_diameter).collect();
    (
        Some(ratio(&counts)),
        diameters.map(|d| ratio(&d)),
        Some(ratio(&lengths)),
    )
}

/// Least-squares slope of `log10(y)` against `x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let mx = mean(x);
    let my = mean(&ly);
    let (sxy, sxx) = x
        .iter()
        .zip(&ly)
        .fold((0.0, 0.0), |(sxy, sxx), (xi, yi)| {
            (sxy + (xi - mx) * (yi - my), sxx + (xi - mx) * (xi - mx))
        });
    sxy / sxx
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and population standard deviation, `None` for an empty slice.
fn mean_std(v: &[f64]) -> Option<(f64, f64)> {
    if v.is_empty() {
        return None;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
    Some((m, var.sqrt()))
}
