use crate::error::{Error, Result};

use super::ensemble::GibbsEnsemble;
use super::field::OccupancyField;

/// Grid replica overlap `(1/n) Σ_k Σ_b m(k,b)² h^d`.
pub fn replica_overlap(field: &OccupancyField) -> f64 {
    field.integrate(|m| m * m)
}

/// Pairwise replica overlap
/// `Σ_{i,j} w_i w_j (1/n) Σ_k |U(B_i(k)) ∩ U(B_j(k))|`, including `i = j`.
/// Quadratic in the ensemble size; used to cross-check the grid form.
pub fn replica_overlap_pairwise(ensemble: &GibbsEnsemble) -> f64 {
    let geom = ensemble.geometry();
    let paths = ensemble.paths();
    let w = ensemble.weights();
    let n = paths[0].grid().n_steps();
    let live: Vec<usize> = (0..paths.len()).filter(|&i| w[i] > 0.0).collect();
    let mut total = 0.0;
    for &i in &live {
        for &j in &live {
            let s: f64 = (0..n)
                .map(|k| {
                    let rho = crate::geometry::dist2(paths[i].position(k), paths[j].position(k)).sqrt();
                    geom.overlap(rho)
                })
                .sum();
            total += w[i] * w[j] * s / n as f64;
        }
    }
    total
}

/// Per-step grid maximizer of the field, ties broken towards the
/// lexicographically smallest bin center.
#[derive(Debug, Clone, PartialEq)]
pub struct FavouritePath {
    bins: Vec<usize>,
    centers: Vec<Vec<f64>>,
    maxima: Vec<f64>,
}

impl FavouritePath {
    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn center(&self, k: usize) -> &[f64] {
        &self.centers[k]
    }

    /// `m*(k) = max_b m(k,b)`.
    pub fn maxima(&self) -> &[f64] {
        &self.maxima
    }
}

pub fn favourite_path(field: &OccupancyField) -> FavouritePath {
    let n = field.n_steps();
    let mut bins = Vec::with_capacity(n);
    let mut maxima = Vec::with_capacity(n);
    for row in field.rows() {
        // rows are index-sorted, so strict `>` keeps the smallest index on ties
        let (mut best, mut best_v) = (0usize, 0.0f64);
        for &(b, v) in row {
            if v > best_v {
                best = b;
                best_v = v;
            }
        }
        if best_v == 0.0 {
            best = 0;
        }
        bins.push(best);
        maxima.push(best_v);
    }
    let centers = bins.iter().map(|&b| field.grid().center(b)).collect();
    FavouritePath { bins, centers, maxima }
}

/// Per-path time fraction spent in the favourite ball,
/// `(1/n) Σ_k 1{‖B_i(k) − y_k‖ ≤ r_d}`.
pub fn favourite_fractions(ensemble: &GibbsEnsemble, fav: &FavouritePath) -> Vec<f64> {
    let geom = ensemble.geometry();
    let n = fav.bins.len();
    ensemble
        .paths()
        .iter()
        .map(|p| (0..n).filter(|&k| geom.contains(p.position(k), &fav.centers[k])).count() as f64 / n as f64)
        .collect()
}

/// `R_* = Σ_i w_i (1/n) Σ_k χ(B_i, k, y_k)`.
pub fn favourite_overlap(ensemble: &GibbsEnsemble, fav: &FavouritePath) -> f64 {
    favourite_fractions(ensemble, fav)
        .iter()
        .zip(ensemble.weights())
        .map(|(f, w)| f * w)
        .sum()
}

/// The three δ-set quantities of the two-to-one bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSets {
    /// time-averaged volume of `{m ∈ [δ, 1−δ]}`
    pub middle: f64,
    /// Gibbs-averaged time-volume of the tube inside `{m ≤ δ}`
    pub negligible_in_tube: f64,
    /// Gibbs-averaged time-volume outside the tube inside `{m ≥ 1−δ}`
    pub predominant_out_of_tube: f64,
}

/// Since `m = Σ_i w_i χ_i` cell by cell, the Gibbs averages reduce to
/// `m·1{m ≤ δ}` and `(1 − m)·1{m ≥ 1−δ}`.
pub fn delta_sets(field: &OccupancyField, delta: f64) -> Result<DeltaSets> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(DeltaSets {
        middle: field.integrate(|m| if m >= delta && m <= 1.0 - delta { 1.0 } else { 0.0 }),
        negligible_in_tube: field.integrate(|m| if m <= delta { m } else { 0.0 }),
        predominant_out_of_tube: field.integrate(|m| if m >= 1.0 - delta { 1.0 - m } else { 0.0 }),
    })
}

/// Grid versions of the two-to-one inequalities for one configuration.
/// Each `slack_*` is (right side − left side) and must be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoToOneReport {
    pub overlap: f64,
    pub favourite_overlap: f64,
    pub mean_mass: f64,
    pub mass_defect: f64,
    /// `(1/n) Σ_k m(k) − overlap`, the grid form of `μ^{⊗2}(1 − R)`
    pub one_minus_overlap: f64,
    pub delta: f64,
    pub delta_sets: DeltaSets,
    pub ess: f64,
    /// `(1/n) Σ_k m*(k)·m(k) − overlap`
    pub slack_overlap_upper: f64,
    /// `1 − overlap + mass_defect − (1 − R_*)`
    pub slack_favourite: f64,
    pub slack_middle: f64,
    pub slack_negligible: f64,
    pub slack_predominant: f64,
    /// `overlap − R_*²/2`, one-dimensional only
    pub slack_overlap_lower: Option<f64>,
}

pub fn two_to_one_report(ensemble: &GibbsEnsemble, field: &OccupancyField, delta: f64) -> Result<TwoToOneReport> {
    let overlap = replica_overlap(field);
    let fav = favourite_path(field);
    let r_star = favourite_overlap(ensemble, &fav);
    let n = field.n_steps() as f64;
    let weighted_max: f64 = fav
        .maxima()
        .iter()
        .zip(field.time_mass())
        .map(|(a, m)| a * m)
        .sum::<f64>()
        / n;
    let mean_mass = field.mean_mass();
    let mass_defect = field.mass_defect();
    let omr = field.integrate(|m| m - m * m);
    let ds = delta_sets(field, delta)?;
    let slack_overlap_lower = (ensemble.paths()[0].dim() == 1).then_some(overlap - 0.5 * r_star * r_star);
    Ok(TwoToOneReport {
        overlap,
        favourite_overlap: r_star,
        mean_mass,
        mass_defect,
        one_minus_overlap: omr,
        delta,
        delta_sets: ds,
        ess: ensemble.ess(),
        slack_overlap_upper: weighted_max - overlap,
        slack_favourite: (1.0 - overlap + mass_defect) - (1.0 - r_star),
        slack_middle: omr / (delta * (1.0 - delta)) - ds.middle,
        slack_negligible: omr / (1.0 - delta) - ds.negligible_in_tube,
        slack_predominant: omr / (1.0 - delta) - ds.predominant_out_of_tube,
        slack_overlap_lower,
    })
}

impl TwoToOneReport {
    pub fn slacks(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("overlap_upper", self.slack_overlap_upper),
            ("favourite", self.slack_favourite),
            ("middle", self.slack_middle),
            ("negligible", self.slack_negligible),
            ("predominant", self.slack_predominant),
        ];
        if let Some(s) = self.slack_overlap_lower {
            v.push(("overlap_lower", s));
        }
        v
    }

    /// First inequality with slack below `-tol`, if any.
    pub fn violation(&self, tol: f64) -> Option<String> {
        self.slacks()
            .into_iter()
            .find(|(_, s)| *s < -tol || s.is_nan())
            .map(|(name, s)| format!("two-to-one inequality `{name}` violated: slack {s:e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_poisson, PointCloud, SpaceTimeBox};
    use crate::geometry::BallGeometry;
    use crate::polymer::{build_ensemble, occupancy_field, sample_paths, GibbsEnsemble, PolymerPath, TimeGrid};
    use crate::rng::{stream, StreamTag};
    use proptest::prelude::*;

    fn random_ensemble(seed: u64, d: usize, m: usize, beta: f64, nu: f64) -> (GibbsEnsemble, OccupancyField) {
        let geom = BallGeometry::new(d).unwrap();
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let paths = sample_paths(&grid, d, m, &mut stream(seed, StreamTag::Paths, 0)).unwrap();
        let b = SpaceTimeBox::covering(&paths, geom.radius(), 0.5).unwrap();
        let cloud = sample_poisson(&b, nu, &mut stream(seed, StreamTag::Cloud, 0)).unwrap();
        let e = build_ensemble(paths, &cloud, beta, &geom).unwrap();
        let f = occupancy_field(&e, &b, geom.radius() / 4.0).unwrap();
        (e, f)
    }

    fn fixed_ensemble(positions: Vec<Vec<f64>>, n: usize, lo: f64, hi: f64) -> GibbsEnsemble {
        let geom = BallGeometry::new(1).unwrap();
        let grid = TimeGrid::new(1.0, n).unwrap();
        let paths = positions
            .into_iter()
            .map(|p| PolymerPath::from_positions(grid, 1, p).unwrap())
            .collect();
        let b = SpaceTimeBox::new(1.0, vec![lo], vec![hi]).unwrap();
        build_ensemble(paths, &PointCloud::empty(b, 1.0), 0.0, &geom).unwrap()
    }

    #[test]
    fn single_path_overlaps() {
        let (e, f) = random_ensemble(1, 1, 1, 0.5, 1.0);
        assert!((replica_overlap_pairwise(&e) - 1.0).abs() < 1e-12);
        let fav = favourite_path(&f);
        assert_eq!(favourite_overlap(&e, &fav), 1.0);
        let ds = delta_sets(&f, 0.25).unwrap();
        assert_eq!(ds.middle, 0.0);
    }

    #[test]
    fn far_apart_paths_do_not_overlap() {
        let n = 4;
        let e = fixed_ensemble(vec![vec![-3.0; n + 1], vec![3.0; n + 1]], n, -4.0, 4.0);
        assert_eq!(replica_overlap_pairwise(&e), 0.5);
        // cross terms vanish; the self terms give Σ w_i² = 1/2
        let b = SpaceTimeBox::new(1.0, vec![-4.0], vec![4.0]).unwrap();
        let f = occupancy_field(&e, &b, 0.125).unwrap();
        assert!((replica_overlap(&f) - 0.25 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_path_meets_favourite_ball_gives_zero() {
        // an all-zero field picks bin 0; nobody sits there
        let n = 2;
        let e = fixed_ensemble(vec![vec![3.0; n + 1]], n, -4.0, 4.0);
        let fav = FavouritePath {
            bins: vec![0, 0],
            centers: vec![vec![-3.9375], vec![-3.9375]],
            maxima: vec![0.0, 0.0],
        };
        assert_eq!(favourite_overlap(&e, &fav), 0.0);
    }

    #[test]
    fn favourite_tie_break_is_lexicographic() {
        // mirror-image paths with equal weights: both balls carry 1/2
        let n = 2;
        let e = fixed_ensemble(vec![vec![-2.0; n + 1], vec![2.0; n + 1]], n, -3.0, 3.0);
        let b = SpaceTimeBox::new(1.0, vec![-3.0], vec![3.0]).unwrap();
        let f = occupancy_field(&e, &b, 0.125).unwrap();
        let fav = favourite_path(&f);
        for k in 0..n {
            assert_eq!(fav.maxima()[k], 0.5);
            assert!(fav.center(k)[0] < 0.0);
            // smallest center within 1/2 of −2
            assert_eq!(fav.center(k)[0], -2.4375);
        }
    }

    #[test]
    fn single_path_favourite_is_nearest_center() {
        let n = 3;
        let e = fixed_ensemble(vec![vec![0.01, 0.3, -0.7, 1.2]], n, -2.0, 2.0);
        let b = SpaceTimeBox::new(1.0, vec![-2.0], vec![2.0]).unwrap();
        let f = occupancy_field(&e, &b, 0.125).unwrap();
        let fav = favourite_path(&f);
        // every bin within 1/2 ties at m = 1; the smallest such center wins
        for (k, x) in [0.01, 0.3, -0.7].iter().enumerate() {
            let c = fav.center(k)[0];
            assert!((c - x).abs() <= 0.5 && c - 0.125 < x - 0.5);
        }
    }

    #[test]
    fn delta_validation() {
        let (_, f) = random_ensemble(2, 1, 5, 0.5, 1.0);
        assert_eq!(delta_sets(&f, 0.0), Err(Error::InvalidDelta(0.0)));
        assert_eq!(delta_sets(&f, 0.6), Err(Error::InvalidDelta(0.6)));
        assert!(delta_sets(&f, 0.5).is_ok());
    }

    #[test]
    fn delta_sets_vanish_for_nested_bins() {
        // d = 1, h = 1/8 divides |U| = 1: a single path covers whole bins
        let (e, f) = random_ensemble(3, 1, 1, 1.0, 1.0);
        let ds = delta_sets(&f, 0.25).unwrap();
        assert_eq!(ds.negligible_in_tube, 0.0);
        assert_eq!(ds.predominant_out_of_tube, 0.0);
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn grid_overlap_tracks_pairwise_form() {
        let d = 1;
        let geom = BallGeometry::new(d).unwrap();
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let paths = sample_paths(&grid, d, 40, &mut stream(4, StreamTag::Paths, 0)).unwrap();
        let b = SpaceTimeBox::covering(&paths, geom.radius(), 0.5).unwrap();
        let cloud = sample_poisson(&b, 2.0, &mut stream(4, StreamTag::Cloud, 0)).unwrap();
        let e = build_ensemble(paths, &cloud, 0.7, &geom).unwrap();
        let exact = replica_overlap_pairwise(&e);
        let mut errs = Vec::new();
        for div in [2.0, 4.0, 8.0] {
            let h = geom.radius() / div;
            let f = occupancy_field(&e, &b, h).unwrap();
            let err = (replica_overlap(&f) / exact - 1.0).abs();
            assert!(err < 2.0 * h, "h = {h}: relative error {err}");
            errs.push(err);
        }
        assert!(errs[2] < errs[0] + 1e-12);
    }

    #[test]
    fn grid_overlap_tracks_pairwise_form_in_two_dimensions() {
        let (e, f) = random_ensemble(6, 2, 30, 0.5, 1.0);
        let h = f.grid().bin_width();
        let exact = replica_overlap_pairwise(&e);
        let grid = replica_overlap(&f);
        assert!((grid / exact - 1.0).abs() < 2.0 * h, "{grid} vs {exact}");
    }

    /// The pointwise inequality behind the δ-set bounds.
    fn pointwise_oracle(u: f64, delta: f64) -> bool {
        let rhs = if u < delta { (1.0 - delta) * u } else { 0.0 }
            + if (delta..=1.0 - delta).contains(&u) { delta * (1.0 - delta) } else { 0.0 }
            + if u > 1.0 - delta { (1.0 - delta) * (1.0 - u) } else { 0.0 };
        u * (1.0 - u) >= rhs - 1e-15
    }

    #[test]
    fn pointwise_delta_inequality_holds() {
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            for delta in [0.01, 0.1, 0.25, 0.5] {
                assert!(pointwise_oracle(u, delta), "u = {u}, delta = {delta}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn two_to_one_grid_inequalities_hold(
            seed in 0u64..1_000_000,
            d in 1usize..=2,
            m in 1usize..30,
            beta in -2.0f64..2.0,
            nu in 0.5f64..4.0,
            delta in 0.05f64..0.5,
        ) {
            let (e, f) = random_ensemble(seed, d, m, beta, nu);
            let rep = two_to_one_report(&e, &f, delta).unwrap();
            prop_assert!(rep.violation(1e-9).is_none(), "{:?}", rep);
            let s: f64 = e.weights().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            // the per-step Cauchy–Schwarz step itself
            let fav = favourite_path(&f);
            let vol = f.grid().cell_volume();
            for k in 0..f.n_steps() {
                let sq: f64 = f.row(k).iter().map(|c| c.1 * c.1).sum::<f64>() * vol;
                prop_assert!(sq <= fav.maxima()[k] * f.time_mass()[k] + 1e-9);
            }
        }
    }
}
