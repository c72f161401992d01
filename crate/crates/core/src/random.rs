//! Seeded generators of random convex polygons and polygon pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{convex_hull, ConvexPolygon, Point};

/// Independent stream `index` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn diameter(poly: &ConvexPolygon<f64>) -> f64 {
    let v = poly.vertices();
    let mut best: f64 = 0.0;
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            best = best.max((*a - *b).norm());
        }
    }
    best
}

/// Convex hull of 4 to 10 uniform points in the unit disk, scaled to a
/// diameter in `[0.5, 3]` and centred on its vertex mean.
pub fn random_convex_polygon<R: Rng + ?Sized>(rng: &mut R) -> ConvexPolygon<f64> {
    loop {
        let k = rng.gen_range(4..=10);
        let pts: Vec<Point<f64>> = (0..k)
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let Ok(hull) = convex_hull(&pts) else { continue };
        let d = diameter(&hull);
        if d < 1e-3 || hull.area() < 1e-4 {
            continue;
        }
        let target = rng.gen_range(0.5..=3.0);
        let s = target / d;
        let c = crate::geom::centroid(&hull);
        let scaled: Vec<Point<f64>> = hull.vertices().iter().map(|&v| (v - c) * s).collect();
        match ConvexPolygon::new(scaled) {
            Ok(p) => return p,
            Err(_) => continue,
        }
    }
}

/// Applies a uniform random rotation and a translation uniform in the disk of
/// radius `reach`.
pub fn random_placement<R: Rng + ?Sized>(rng: &mut R, poly: &ConvexPolygon<f64>, reach: f64) -> ConvexPolygon<f64> {
    let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let r = reach * rng.gen::<f64>().sqrt();
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    poly.transform(theta, r * a.cos(), r * a.sin())
}

/// Two random polygons under random rigid motions; roughly a third overlap.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R) -> (ConvexPolygon<f64>, ConvexPolygon<f64>) {
    let a = random_convex_polygon(rng);
    let b = random_convex_polygon(rng);
    let a = random_placement(rng, &a, 0.0);
    let b = random_placement(rng, &b, 4.0);
    (a, b)
}

/// Pair `index` of the suite seeded with `seed`; independent of other indices.
pub fn suite_pair(seed: u64, index: u64) -> (ConvexPolygon<f64>, ConvexPolygon<f64>) {
    random_pair(&mut stream_rng(seed, index))
}
