use super::smooth::{between, bearing_to, box_enclosure, directional, oriented, polygon, Agg};
use super::{Atom, Predicate, Scene, SpatialError};
use crate::oracle::{exact_clearance, exact_distance, exact_enclosure};

fn clearance(scene: &Scene<f64>, i: &str, j: &str, name: &'static str) -> Result<f64, SpatialError> {
    Ok(exact_clearance(polygon(scene, i, name)?, polygon(scene, j, name)?))
}

fn enclosure(scene: &Scene<f64>, i: &str, j: &str, delta: f64) -> Result<f64, SpatialError> {
    if let Some(r) = box_enclosure(scene, i, j, delta, Agg::Hard)? {
        return Ok(r);
    }
    Ok(exact_enclosure(polygon(scene, i, "enclIn")?, polygon(scene, j, "enclIn")?, delta))
}

pub(crate) fn eval(atom: &Atom, scene: &Scene<f64>) -> Result<f64, SpatialError> {
    let o = &atom.objects;
    match atom.predicate {
        Predicate::CloseTo { eps } | Predicate::FarFrom { eps } => {
            let name = atom.predicate.name();
            let d = exact_distance(polygon(scene, &o[0], name)?, polygon(scene, &o[1], name)?);
            Ok(if matches!(atom.predicate, Predicate::CloseTo { .. }) { eps - d } else { d - eps })
        }
        Predicate::Touch { eps } => Ok(eps - clearance(scene, &o[0], &o[1], "touch")?.abs()),
        Predicate::Ovlp { delta } => Ok(-clearance(scene, &o[0], &o[1], "ovlp")? - delta),
        Predicate::PartOvlp { delta_ov, delta_in } => {
            let ov = -clearance(scene, &o[0], &o[1], "partOvlp")? - delta_ov;
            let ij = -enclosure(scene, &o[0], &o[1], delta_in)?;
            let ji = -enclosure(scene, &o[1], &o[0], delta_in)?;
            Ok(ov.min(ij).min(ji))
        }
        Predicate::EnclIn { delta } => enclosure(scene, &o[0], &o[1], delta),
        Predicate::Directional { dir, kappa } => directional(scene, dir, &o[0], &o[1], kappa, Agg::Hard),
        Predicate::Between { axis, kappa } => between(scene, axis, o, kappa, Agg::Hard),
        Predicate::Oriented { kappa } => oriented(scene, &o[0], &o[1], kappa),
        Predicate::BearingTo { theta_ref, kappa } => bearing_to(scene, &o[0], &o[1], theta_ref, kappa),
    }
}
