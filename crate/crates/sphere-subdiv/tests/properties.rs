//! Property-based checks of the geometric primitives and mask validation.

use proptest::prelude::*;

use sphere_subdiv::geometry::{
    exp_map, geodesic_distance, log_map, TangentVector, UnitPoint,
};
use sphere_subdiv::linalg;
use sphere_subdiv::mean::geodesic_average;
use sphere_subdiv::schemes::Mask;

fn normalize3(v: [f64; 3]) -> Option<UnitPoint<f64>> {
    let n = linalg::norm(&v);
    if n < 0.1 {
        return None;
    }
    UnitPoint::new(v.iter().map(|c| c / n).collect()).ok()
}

fn unit_tangent_at(x: &UnitPoint<f64>, raw: [f64; 3]) -> Option<TangentVector<f64>> {
    let dot = linalg::dot(&raw, x.coords());
    let comp: Vec<f64> = raw
        .iter()
        .zip(x.coords())
        .map(|(r, c)| r - dot * c)
        .collect();
    let n = linalg::norm(&comp);
    if n < 0.1 {
        return None;
    }
    TangentVector::new(x.clone(), comp.iter().map(|c| c / n).collect()).ok()
}

/// Rotation of `v` by `angle` around the unit `axis`.
fn rodrigues(v: &[f64], axis: &[f64; 3], angle: f64) -> Vec<f64> {
    let (sin, cos) = angle.sin_cos();
    let cross = [
        axis[1] * v[2] - axis[2] * v[1],
        axis[2] * v[0] - axis[0] * v[2],
        axis[0] * v[1] - axis[1] * v[0],
    ];
    let dot = linalg::dot(axis, v);
    (0..3)
        .map(|i| v[i] * cos + cross[i] * sin + axis[i] * dot * (1.0 - cos))
        .collect()
}

proptest! {
    #[test]
    fn tangent_roundtrip_within_1e9(
        xv in prop::array::uniform3(-1.0f64..1.0),
        tv in prop::array::uniform3(-1.0f64..1.0),
        theta in 0.0f64..3.0,
    ) {
        let Some(x) = normalize3(xv) else { return Ok(()) };
        let Some(dir) = unit_tangent_at(&x, tv) else { return Ok(()) };
        let w = dir.scaled(theta);
        let y = exp_map(&w);
        let back = log_map(&x, &y).unwrap();
        let err: Vec<f64> = w
            .components()
            .iter()
            .zip(back.components())
            .map(|(a, b)| a - b)
            .collect();
        prop_assert!(linalg::norm(&err) < 1e-9);
    }

    #[test]
    fn point_roundtrip_within_1e9(
        xv in prop::array::uniform3(-1.0f64..1.0),
        yv in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let Some(x) = normalize3(xv) else { return Ok(()) };
        let Some(y) = normalize3(yv) else { return Ok(()) };
        if linalg::dot(x.coords(), y.coords()) <= -1.0 + 1e-6 {
            return Ok(());
        }
        let v = log_map(&x, &y).unwrap();
        let y2 = exp_map(&v);
        let err: Vec<f64> = y
            .coords()
            .iter()
            .zip(y2.coords())
            .map(|(a, b)| a - b)
            .collect();
        prop_assert!(linalg::norm(&err) < 1e-9);
    }

    #[test]
    fn distance_is_symmetric_and_triangular(
        xv in prop::array::uniform3(-1.0f64..1.0),
        yv in prop::array::uniform3(-1.0f64..1.0),
        zv in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let (Some(x), Some(y), Some(z)) = (normalize3(xv), normalize3(yv), normalize3(zv)) else {
            return Ok(());
        };
        let dxy = geodesic_distance(&x, &y).unwrap();
        let dyx = geodesic_distance(&y, &x).unwrap();
        prop_assert_eq!(dxy, dyx);
        let dxz = geodesic_distance(&x, &z).unwrap();
        let dyz = geodesic_distance(&y, &z).unwrap();
        prop_assert!(dxz <= dxy + dyz + 1e-12);
        prop_assert!((0.0..=std::f64::consts::PI + 1e-12).contains(&dxy));
    }

    #[test]
    fn distance_is_rotation_invariant(
        xv in prop::array::uniform3(-1.0f64..1.0),
        yv in prop::array::uniform3(-1.0f64..1.0),
        av in prop::array::uniform3(-1.0f64..1.0),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let (Some(x), Some(y), Some(axis)) = (normalize3(xv), normalize3(yv), normalize3(av))
        else {
            return Ok(());
        };
        let axis: [f64; 3] = [axis.coords()[0], axis.coords()[1], axis.coords()[2]];
        let rx = UnitPoint::new_renormalized(rodrigues(x.coords(), &axis, angle))
            .unwrap()
            .0;
        let ry = UnitPoint::new_renormalized(rodrigues(y.coords(), &axis, angle))
            .unwrap()
            .0;
        let before = geodesic_distance(&x, &y).unwrap();
        let after = geodesic_distance(&rx, &ry).unwrap();
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn geodesic_average_splits_distance(
        xv in prop::array::uniform3(-1.0f64..1.0),
        yv in prop::array::uniform3(-1.0f64..1.0),
        beta in 0.0f64..1.0,
    ) {
        let (Some(x), Some(y)) = (normalize3(xv), normalize3(yv)) else { return Ok(()) };
        if linalg::dot(x.coords(), y.coords()) <= -1.0 + 1e-6 {
            return Ok(());
        }
        let mid = geodesic_average(&x, &y, beta).unwrap();
        let d = geodesic_distance(&x, &y).unwrap();
        let dx = geodesic_distance(&x, &mid).unwrap();
        let dy = geodesic_distance(&mid, &y).unwrap();
        prop_assert!((dx - beta * d).abs() < 1e-9);
        prop_assert!((dx + dy - d).abs() < 1e-9);
    }

    #[test]
    fn affine_masks_are_accepted_and_partitioned(
        raw in prop::collection::vec(0.05f64..1.0, 3..9),
        first in -4i64..1,
    ) {
        // Normalize each parity class to sum 1, which is exactly the
        // affine-invariance requirement.
        let mut coeffs = raw;
        for parity in 0..2usize {
            let sum: f64 = coeffs.iter().skip(parity).step_by(2).sum();
            if sum < 0.05 {
                return Ok(());
            }
            coeffs
                .iter_mut()
                .skip(parity)
                .step_by(2)
                .for_each(|c| *c /= sum);
        }
        let mask = Mask::new(first, coeffs.clone()).unwrap();
        for rule in [mask.even_rule(), mask.odd_rule()] {
            let sum: f64 = rule.weights.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(!rule.weights.is_empty());
            for pair in rule.offsets.windows(2) {
                prop_assert!(pair[0] < pair[1]);
            }
        }

        // Breaking one coefficient breaks affine invariance.
        let mut broken = coeffs;
        broken[0] += 1e-3;
        prop_assert!(Mask::new(first, broken).is_err());
    }
}
