//! Fixtures shared by the benchmarks.

use poisson_polymer::environment::sample_poisson;
use poisson_polymer::polymer::sample_paths;
use poisson_polymer::rng::{stream, StreamTag};
use poisson_polymer::{BallGeometry, PointCloud, PolymerPath, SpaceTimeBox, TimeGrid};

pub struct Fixture {
    pub geom: BallGeometry,
    pub paths: Vec<PolymerPath>,
    pub bbox: SpaceTimeBox,
    pub cloud: PointCloud,
}

/// `m` one-dimensional paths on `[0, t]` with 64 steps per unit time and a
/// medium of intensity `nu` around them.
pub fn fixture(m: usize, t: f64, nu: f64) -> Fixture {
    let geom = BallGeometry::new(1).expect("d = 1");
    let grid = TimeGrid::new(t, (64.0 * t) as usize).expect("valid grid");
    let paths = sample_paths(&grid, 1, m, &mut stream(1, StreamTag::Paths, 0)).expect("paths");
    let bbox = SpaceTimeBox::covering(&paths, geom.radius(), 0.5).expect("window");
    let cloud = sample_poisson(&bbox, nu, &mut stream(1, StreamTag::Cloud, 0)).expect("cloud");
    Fixture {
        geom,
        paths,
        bbox,
        cloud,
    }
}
