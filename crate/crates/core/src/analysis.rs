//! Per-branch pipeline and aggregation into a bound report.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, Rat};
use crate::elim::{eliminate, Elimination};
use crate::field::{dense_kernel, dense_rank, Q};
use crate::metric::{MetricError, MetricSpec};
use crate::modp::{random_primes, Fp};
use crate::momentum::PhiParity;
use crate::prolong::{
    evaluate_with, point_jets, prolong, select_gauge, trivial_span_dim, trivial_vectors, PointSystem, ProlongedSystem,
};
use crate::rank::{echelon_exact, fp_dense, ConsistencyError, RankCertificate, RankMethod, SparseIntMatrix};
use crate::system::{branch_counts, static_split_plan, trivials_count, BranchSpec, HamiltonianData};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("point ({x}, {y}) is not admissible: {source}")]
    Point { x: String, y: String, source: AlgebraError },
    #[error("branch {branch} does not fit the metric: {reason}")]
    Branch { branch: String, reason: String },
    #[error("no admissible random point found")]
    NoRandomPoint,
    #[error(transparent)]
    Consistency(#[from] ConsistencyError),
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    /// Prolongation order; the valence when `None`.
    pub prolong: Option<u32>,
    pub gauge: bool,
    /// Skip the modular path.
    pub exact: bool,
    pub seed: u64,
    pub primes: usize,
    /// Repeat every branch at a random admissible point.
    pub second_point: bool,
    pub timings: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { prolong: None, gauge: true, exact: false, seed: 0, primes: 3, second_point: true, timings: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub meqns: u64,
    pub nvars: u64,
    pub zero_rows_dropped: usize,
    pub eliminated_cols: usize,
    pub gauge_fixed_cols: usize,
    pub rows_after_elim: usize,
    pub cols_after_elim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchResult {
    pub branch: BranchSpec,
    pub label: String,
    pub point: [String; 2],
    pub prolong: u32,
    pub counts: Counts,
    pub rank: RankCertificate,
    pub nullity: usize,
    pub trivial_count: usize,
    pub trivial_span_dim: usize,
    pub remaining_trivial: usize,
    pub upper_bound: usize,
    pub extra_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericityCheck {
    pub point: [String; 2],
    pub nullity: usize,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub multiplicity: u32,
    pub result: BranchResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<GenericityCheck>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "two-parity")]
    TwoParity,
    #[serde(rename = "static-split")]
    StaticSplit,
    #[serde(rename = "single-branch")]
    SingleBranch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "no-additional-KT")]
    NoAdditionalKt,
    #[serde(rename = "extra-candidates")]
    ExtraCandidates(u64),
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricInfo {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub metric: MetricInfo,
    pub valence: u32,
    pub mode: Mode,
    pub seed: u64,
    pub branches: Vec<BranchEntry>,
    pub total_upper_bound: u64,
    pub trivials_expected: u64,
    pub total_extra: u64,
    pub non_generic_point_suspected: bool,
    pub verdict: Verdict,
}

fn point_strings(p: &(Rat, Rat)) -> [String; 2] {
    [p.0.to_string(), p.1.to_string()]
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Pipeline stages up to the point system, shared by the rank paths and the matrix dump.
struct Prepared {
    sys: ProlongedSystem,
    ps: PointSystem,
    trivials: Vec<Vec<Rat>>,
    span: usize,
    gauge: Vec<usize>,
}

fn prepare(
    g: &MetricSpec,
    branch: &BranchSpec,
    point: &(Rat, Rat),
    order: u32,
    gauge: bool,
    timings: &mut BTreeMap<String, u64>,
) -> Result<Prepared, AnalysisError> {
    g.check_point(&point.0, &point.1)?;
    let t = Instant::now();
    let h = HamiltonianData::from_metric(g)?;
    if !h.compatible(branch) {
        return Err(AnalysisError::Branch {
            branch: branch.label(),
            reason: "the Hamiltonian is not even in the momenta this branch separates".into(),
        });
    }
    let sys = prolong(&h, branch, order);
    let pj = point_jets(&sys, &point.0, &point.1).map_err(|source| AnalysisError::Point {
        x: point.0.to_string(),
        y: point.1.to_string(),
        source,
    })?;
    let ps = evaluate_with(&sys, &pj);
    timings.insert("evaluate".into(), ms(t));
    let t = Instant::now();
    let trivials = trivial_vectors(&sys, &pj);
    if let Some(n) = trivials.iter().position(|v| !ps.annihilates(v)) {
        return Err(ConsistencyError(format!("trivial integral {n} does not solve the evaluated system")).into());
    }
    let span = trivial_span_dim(&trivials);
    let gauge = if gauge { select_gauge(&sys, &trivials, span) } else { Vec::new() };
    if gauge.len() > span {
        return Err(ConsistencyError("more gauge columns than trivial directions".into()).into());
    }
    timings.insert("trivials".into(), ms(t));
    Ok(Prepared { sys, ps, trivials, span, gauge })
}

/// Exact solutions of the gauge-fixed system coming from trivial integrals, independent.
fn trivial_hints(p: &Prepared) -> Vec<Vec<Rat>> {
    let mut basis: Vec<Vec<Rat>> = Vec::new();
    for v in &p.trivials {
        if basis.len() == p.span {
            break;
        }
        let mut trial = basis.clone();
        trial.push(v.clone());
        if p.span == p.trivials.len() || dense_rank(&Q, trial) > basis.len() {
            basis.push(v.clone());
        }
    }
    if p.gauge.is_empty() {
        return basis;
    }
    // Combinations vanishing on every gauge column.
    let mt: Vec<Vec<Rat>> = p.gauge.iter().map(|&c| basis.iter().map(|v| v[c].clone()).collect()).collect();
    dense_kernel(&Q, mt, basis.len())
        .into_iter()
        .map(|lam| {
            let mut out = vec![Rat::new(); p.ps.ncols()];
            for (l, v) in lam.iter().zip(&basis) {
                if *l != 0 {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += Rat::from(l * x);
                    }
                }
            }
            out
        })
        .collect()
}

fn counts_of<E: Clone>(branch: &BranchSpec, order: u32, ps: &PointSystem, el: &Elimination<E>) -> Counts {
    let (meqns, nvars) = branch_counts(branch, order);
    Counts {
        meqns,
        nvars,
        zero_rows_dropped: ps.zero_rows_dropped + el.zero_rows_dropped,
        eliminated_cols: el.eliminated_count(),
        gauge_fixed_cols: el.gauge_cols.len(),
        rows_after_elim: el.rows.len(),
        cols_after_elim: el.remaining_cols.len(),
    }
}

/// Eliminated system over the rationals, as a primitive integer matrix.
pub fn eliminated_matrix(
    g: &MetricSpec,
    branch: &BranchSpec,
    point: &(Rat, Rat),
    order: u32,
    gauge: bool,
) -> Result<SparseIntMatrix, AnalysisError> {
    let p = prepare(g, branch, point, order, gauge, &mut BTreeMap::new())?;
    let el = eliminate(&Q, p.ps.rows.clone(), &p.ps.col_orders(), &p.gauge);
    Ok(SparseIntMatrix::from_rational_rows(el.remaining_cols.len(), &el.rational_rows()))
}

/// Full pipeline for one branch at one point.
pub fn analyze_branch(
    g: &MetricSpec,
    branch: &BranchSpec,
    point: &(Rat, Rat),
    order: u32,
    opts: &AnalysisOptions,
) -> Result<BranchResult, AnalysisError> {
    let mut timings = BTreeMap::new();
    let p = prepare(g, branch, point, order, opts.gauge, &mut timings)?;
    let orders = p.ps.col_orders();
    let remaining_trivial = p.span - p.gauge.len();

    let mut primes_used = Vec::new();
    let mut outcome: Option<(Counts, RankCertificate)> = None;
    if !opts.exact {
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut hints: Option<Vec<Vec<Rat>>> = None;
        for prime in random_primes(&mut rng, opts.primes) {
            let fp = Fp::new(prime);
            let Some(rows) = p.ps.reduce(&fp) else { continue };
            primes_used.push(prime);
            let el = eliminate(&fp, rows, &orders, &p.gauge);
            let ncols = el.remaining_cols.len();
            let rank = dense_rank(&fp, fp_dense(&el.rows, ncols));
            let counts = counts_of(branch, order, &p.ps, &el);
            if rank == ncols {
                let cert = RankCertificate {
                    rank,
                    method: RankMethod::ModularFullRank,
                    primes_used: primes_used.clone(),
                    kernel_dim: 0,
                    kernel_verified: true,
                };
                outcome = Some((counts, cert));
                break;
            }
            let hints = hints.get_or_insert_with(|| trivial_hints(&p));
            if rank + hints.len() == ncols {
                if let Some(n) = hints.iter().position(|v| !p.ps.annihilates(v)) {
                    return Err(ConsistencyError(format!("kernel hint {n} does not solve the evaluated system")).into());
                }
                let cert = RankCertificate {
                    rank,
                    method: RankMethod::ModularVerifiedKernel,
                    primes_used: primes_used.clone(),
                    kernel_dim: hints.len(),
                    kernel_verified: true,
                };
                outcome = Some((counts, cert));
                break;
            }
            log::debug!("{}: rank {rank} mod {prime} of {ncols} columns is inconclusive", branch.label());
        }
        timings.insert("modular".into(), ms(t));
    }
    let (counts, cert) = match outcome {
        Some(o) => o,
        None => {
            let t = Instant::now();
            let el = eliminate(&Q, p.ps.rows.clone(), &orders, &p.gauge);
            let a = SparseIntMatrix::from_rational_rows(el.remaining_cols.len(), &el.rational_rows());
            let ech = echelon_exact(&a);
            let kernel = ech.kernel_basis();
            for (n, v) in kernel.iter().enumerate() {
                if !a.annihilates(v) {
                    return Err(ConsistencyError(format!("kernel vector {n} fails on the eliminated matrix")).into());
                }
                if !p.ps.annihilates(&el.lift(&Q, v)) {
                    return Err(ConsistencyError(format!("lifted kernel vector {n} fails on the evaluated system")).into());
                }
            }
            let cert = RankCertificate {
                rank: ech.rank(),
                method: RankMethod::ExactElimination,
                primes_used,
                kernel_dim: kernel.len(),
                kernel_verified: true,
            };
            timings.insert("exact".into(), ms(t));
            (counts_of(branch, order, &p.ps, &el), cert)
        }
    };
    let nullity = counts.cols_after_elim - cert.rank;
    if counts.cols_after_elim + counts.eliminated_cols + counts.gauge_fixed_cols != p.sys.ncols() {
        return Err(ConsistencyError("column accounting does not add up".into()).into());
    }
    if nullity < remaining_trivial {
        return Err(ConsistencyError(format!(
            "nullity {nullity} is below the {remaining_trivial} trivial directions left after gauge fixing"
        ))
        .into());
    }
    Ok(BranchResult {
        branch: *branch,
        label: branch.label(),
        point: point_strings(point),
        prolong: order,
        upper_bound: nullity + counts.gauge_fixed_cols,
        counts,
        rank: cert,
        nullity,
        trivial_count: p.trivials.len(),
        trivial_span_dim: p.span,
        remaining_trivial,
        extra_dim: nullity - remaining_trivial,
        timings_ms: opts.timings.then_some(timings),
    })
}

/// A pseudorandom admissible point of small height, distinct from `avoid`.
pub fn random_point(g: &MetricSpec, seed: u64, avoid: &(Rat, Rat)) -> Result<(Rat, Rat), AnalysisError> {
    let h = HamiltonianData::from_metric(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for _ in 0..2000 {
        let mut draw = || Rat::from((rng.gen_range(-24i64..=24), rng.gen_range(1i64..=7)));
        let cand = (draw(), draw());
        if &cand == avoid || g.check_point(&cand.0, &cand.1).is_err() {
            continue;
        }
        let ok = h.funcs.iter().all(|f| f.den_at(&cand.0, &cand.1) != 0)
            && h.terms.iter().filter(|(m, _)| m[0] == 2 || m[1] == 2).all(|(_, f)| {
                h.funcs[*f].eval(&cand.0, &cand.1).map(|v| v != 0).unwrap_or(false)
            });
        if ok {
            return Ok(cand);
        }
    }
    Err(AnalysisError::NoRandomPoint)
}

/// Branches of a mode: the static split, both parities, or the single given branch.
pub fn plan(mode: Mode, d: u32, single: Option<BranchSpec>) -> Vec<BranchSpec> {
    match mode {
        Mode::StaticSplit => static_split_plan(d),
        Mode::TwoParity => vec![BranchSpec::new(d, 0, PhiParity::Any), BranchSpec::new(d, 1, PhiParity::Any)],
        Mode::SingleBranch => vec![single.expect("single-branch mode needs a branch")],
    }
}

pub fn default_mode(g: &MetricSpec) -> Mode {
    if g.static_flag {
        Mode::StaticSplit
    } else {
        Mode::TwoParity
    }
}

/// Runs every branch of `branches` (at `point`, and at a random second point if enabled) and aggregates.
pub fn run_analysis(
    g: &MetricSpec,
    d: u32,
    mode: Mode,
    branches: &[BranchSpec],
    point: &(Rat, Rat),
    opts: &AnalysisOptions,
) -> Result<BoundReport, AnalysisError> {
    if mode == Mode::StaticSplit && !g.static_flag {
        return Err(AnalysisError::Branch {
            branch: "static split".into(),
            reason: format!("metric '{}' is not static", g.name),
        });
    }
    g.check_point(&point.0, &point.1)?;
    let order = |b: &BranchSpec| opts.prolong.map_or(b.d, |m| m.max(b.d));
    let second = if opts.second_point { Some(random_point(g, opts.seed, point)?) } else { None };
    let mut jobs: Vec<(usize, (Rat, Rat))> = branches.iter().enumerate().map(|(n, _)| (n, point.clone())).collect();
    if let Some(q) = &second {
        jobs.extend((0..branches.len()).map(|n| (n, q.clone())));
    }
    let results: Vec<Result<BranchResult, AnalysisError>> =
        jobs.par_iter().map(|(n, pt)| analyze_branch(g, &branches[*n], pt, order(&branches[*n]), opts)).collect();
    let mut results = results.into_iter();
    let first: Vec<BranchResult> = results.by_ref().take(branches.len()).collect::<Result<_, _>>()?;
    let other: Vec<BranchResult> = results.collect::<Result<_, _>>()?;

    let mut entries = Vec::new();
    let mut non_generic = false;
    for (n, r) in first.into_iter().enumerate() {
        let (result, cross_check) = match other.get(n) {
            None => (r, None),
            Some(o) => {
                let agrees = o.nullity == r.nullity;
                non_generic |= !agrees;
                // Keep the larger nullity: rank can only drop at special points.
                let (keep, alt) = if o.nullity > r.nullity { (o.clone(), r) } else { (r, o.clone()) };
                (keep, Some(GenericityCheck { point: alt.point.clone(), nullity: alt.nullity, agrees }))
            }
        };
        entries.push(BranchEntry { multiplicity: branches[n].multiplicity, result, cross_check });
    }
    let total_upper_bound = entries.iter().map(|e| e.multiplicity as u64 * e.result.upper_bound as u64).sum();
    let total_extra: u64 = entries.iter().map(|e| e.multiplicity as u64 * e.result.extra_dim as u64).sum();
    let trivials_expected = match mode {
        Mode::SingleBranch => entries.iter().map(|e| e.multiplicity as u64 * e.result.trivial_count as u64).sum(),
        _ => trivials_count(d, 4).to_u64().expect("small count"),
    };
    let verdict = if non_generic {
        Verdict::Inconclusive
    } else if total_extra == 0 {
        Verdict::NoAdditionalKt
    } else {
        Verdict::ExtraCandidates(total_extra)
    };
    Ok(BoundReport {
        metric: MetricInfo {
            name: g.name.clone(),
            params: g.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        },
        valence: d,
        mode,
        seed: opts.seed,
        branches: entries,
        total_upper_bound,
        trivials_expected,
        total_extra,
        non_generic_point_suspected: non_generic,
        verdict,
    })
}

/// Default analysis of valence `d` at the metric's first suggested point.
pub fn full_analysis(g: &MetricSpec, d: u32, opts: &AnalysisOptions) -> Result<BoundReport, AnalysisError> {
    let mode = default_mode(g);
    let point = g.suggested_points.first().cloned().ok_or_else(|| {
        MetricError::Invariant(format!("metric '{}' has no suggested point", g.name))
    })?;
    run_analysis(g, d, mode, &plan(mode, d, None), &point, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::builtin;

    #[test]
    fn kerr_valence_two_has_the_carter_direction() {
        let g = builtin("kerr_extreme").unwrap();
        let r = full_analysis(&g, 2, &AnalysisOptions::default()).unwrap();
        let e0 = &r.branches[0].result;
        assert_eq!((e0.upper_bound, e0.extra_dim, e0.trivial_span_dim), (5, 1, 4));
        assert_eq!(r.branches[1].result.upper_bound, 0);
        assert_eq!(r.verdict, Verdict::ExtraCandidates(1));
        assert!(r.branches.iter().all(|b| b.cross_check.as_ref().unwrap().agrees));
    }

    #[test]
    fn flat_translation_is_found() {
        let g = builtin("flat_cyl").unwrap();
        let b = BranchSpec::new(1, 1, PhiParity::Any);
        let r = analyze_branch(&g, &b, &g.suggested_points[0], 1, &AnalysisOptions::default()).unwrap();
        assert!(r.extra_dim >= 1);
        assert_eq!(r.rank.method, RankMethod::ExactElimination);
    }

    #[test]
    fn reports_are_deterministic() {
        let g = builtin("ts2").unwrap();
        let o = AnalysisOptions { seed: 7, ..Default::default() };
        let a = full_analysis(&g, 2, &o).unwrap();
        let b = full_analysis(&g, 2, &o).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.verdict, Verdict::NoAdditionalKt);
    }
}
