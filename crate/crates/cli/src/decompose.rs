use flatbody::kinematics::{deformation_invariants, green_tensor_of, kirchhoff_love_parameter, two_polar_decompose};
use flatbody::{Error, PlacementMatrix};
use serde::Serialize;

use crate::Failure;

#[derive(Serialize)]
struct Decomposition {
    rotation: [[f64; 3]; 3],
    lambda: f64,
    mu: f64,
    rho: f64,
    theta: f64,
    kirchhoff_love: f64,
    invariants: [f64; 3],
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Degenerate { .. } => "degenerate",
        Error::ConstraintViolation { .. } => "constraint_violation",
        Error::DegenerateColumns => "degenerate_columns",
        Error::Orientation { .. } => "orientation",
        Error::Structure(_) => "structure",
        _ => "invalid",
    }
}

pub fn run(values: &[f64]) -> Result<String, Failure> {
    let entries: [f64; 9] = values
        .try_into()
        .map_err(|_| Failure::Config(format!("expected 9 matrix entries, got {}", values.len())))?;
    if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
        return Err(Failure::Config(format!("matrix entries must be finite, got {x}")));
    }
    let phi = PlacementMatrix::from_row_slice(&entries);
    let flagged = |e: Error| {
        let json = serde_json::json!({ "error": { "kind": kind(&e), "message": e.to_string() } });
        Failure::Flagged(e.to_string(), Some(json.to_string()))
    };
    // the constraint comes first: a matrix that violates it has no
    // meaningful two-polar form
    let ell = kirchhoff_love_parameter(&phi).map_err(flagged)?;
    let (r, shape) = two_polar_decompose(&phi).map_err(flagged)?;
    let invariants = deformation_invariants(&green_tensor_of(&phi)).map_err(flagged)?;
    let out = Decomposition {
        rotation: r.matrix().m,
        lambda: shape.lambda,
        mu: shape.mu,
        rho: shape.rho,
        theta: shape.theta,
        kirchhoff_love: ell,
        invariants,
    };
    serde_json::to_string_pretty(&out).map_err(|e| Failure::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_example() {
        let text = run(&[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["lambda"], 2.0);
        assert_eq!(v["mu"], 1.0);
        assert_eq!(v["rho"], 0.5);
        assert_eq!(v["theta"], 0.0);
        assert_eq!(v["kirchhoff_love"], 0.25);
    }

    #[test]
    fn failures_are_flagged() {
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert!(matches!(run(&id), Err(Failure::Flagged(m, _)) if m.contains("degenerate")));
        let skew = [2.0, 0.0, 0.3, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5];
        assert!(matches!(run(&skew), Err(Failure::Flagged(m, _)) if m.contains("Kirchhoff")));
        assert!(matches!(run(&id[..8]), Err(Failure::Config(_))));
    }
}
