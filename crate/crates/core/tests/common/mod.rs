#![allow(dead_code)]

use rand::Rng;

use smoothspatial::geom::{ConvexPolygon, Point, PolygonTemplate, Pose2D};
use smoothspatial::random::{random_convex_polygon, stream_rng};
use smoothspatial::{Scalar, Scene, SceneObject, Trajectory};

pub const NAMES: [&str; 3] = ["a", "b", "c"];

/// Three random polygon templates.
pub fn templates(seed: u64) -> Vec<PolygonTemplate> {
    let mut rng = stream_rng(seed, u64::MAX);
    (0..3)
        .map(|_| PolygonTemplate::new(random_convex_polygon(&mut rng).vertices().to_vec()).unwrap())
        .collect()
}

/// Scene with object `i` placed at pose `x[3i..3i+3]`, heading along its
/// rotation.
pub fn scene<T: Scalar>(templates: &[PolygonTemplate], x: &[T]) -> Scene<T> {
    let mut s = Scene::new();
    for (i, t) in templates.iter().enumerate() {
        let pose = Pose2D::new(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
        let poly: ConvexPolygon<T> = t.place(&pose);
        let heading: Point<T> = pose.heading();
        s.insert(NAMES[i], SceneObject::polygon(poly).with_heading(heading)).unwrap();
    }
    s
}

pub fn random_poses<R: Rng>(rng: &mut R, n: usize, reach: f64) -> Vec<f64> {
    (0..n)
        .flat_map(|_| {
            [
                rng.gen_range(-reach..reach),
                rng.gen_range(-reach..reach),
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            ]
        })
        .collect()
}

/// Random trajectory of the three objects over `0..=horizon`.
pub fn trajectory(seed: u64, horizon: usize) -> Trajectory<f64> {
    let t = templates(seed);
    let mut rng = stream_rng(seed, 0);
    let scenes = (0..=horizon).map(|_| scene(&t, &random_poses(&mut rng, 3, 3.0))).collect();
    Trajectory::new(scenes, 1.0).unwrap()
}
