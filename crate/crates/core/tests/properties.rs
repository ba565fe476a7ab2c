use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;
use softfoot::contact_geometry::{
    contact_centroid, convex_hull, resultant_of_field, stability_test, zmp_on_plane, ContactPlane,
    ContactRegion, TractionSample,
};
use softfoot::harness::{cop_from_forces, log_grid, zmp_of_forces};
use softfoot::planar::{adaptive_admissible_com_range, adaptive_arch_forces, AdaptiveArchParams};
use softfoot::softfoot::{
    assemble_linear_system, solve_closed_form, solve_linear, FootLoad, SoftFootParams,
};

fn plane() -> impl Strategy<Value = ContactPlane> {
    (
        -0.5..0.5f64,
        -0.5..0.5f64,
        -0.5..0.5f64,
        -1.0..1.0f64,
        -1.0..1.0f64,
    )
        .prop_map(|(ox, oy, oz, a, b)| {
            ContactPlane::new(Vector3::new(ox, oy, oz), Vector3::new(a, b, 1.0)).unwrap()
        })
}

/// Compressive samples: positive pressure, arbitrary friction.
fn compressive_samples() -> impl Strategy<Value = Vec<TractionSample>> {
    prop::collection::vec(
        (
            -0.2..0.2f64,
            -0.1..0.1f64,
            1.0..1e4f64,
            -500.0..500.0f64,
            -500.0..500.0f64,
            1e-4..1e-2f64,
        ),
        1..40,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .map(|(x, y, p, fu, fv, w)| {
                TractionSample::new(Vector2::new(x, y), Vector3::new(p, fu, fv), w).unwrap()
            })
            .collect()
    })
}

fn points() -> impl Strategy<Value = Vec<Vector2<f64>>> {
    prop::collection::vec(
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y)| Vector2::new(x, y)),
        1..60,
    )
}

fn close3(a: &Vector3<f64>, b: &Vector3<f64>, scale: f64) -> bool {
    (a - b).norm() <= 1e-9 * scale.max(1.0)
}

proptest! {
    #[test]
    fn centroid_lies_in_the_hull(samples in compressive_samples(), plane in plane()) {
        let field = ContactRegion::new(samples, plane).unwrap();
        let c = contact_centroid(&field).unwrap();
        let hull = convex_hull(&field.positions()).unwrap();
        prop_assert!(hull.contains(&c.point, 1e-12), "distance {}", hull.signed_distance(&c.point));
        prop_assert!(c.normal_force > 0.0);
    }

    #[test]
    fn centroid_system_is_equivalent(
        samples in compressive_samples(),
        plane in plane(),
        rx in -1.0..1.0f64, ry in -1.0..1.0f64, rz in -1.0..1.0f64,
    ) {
        let field = ContactRegion::new(samples, plane.clone()).unwrap();
        let reference = Vector3::new(rx, ry, rz);
        let direct = resultant_of_field(&field).about(&reference);
        let reduced = contact_centroid(&field).unwrap().wrench_about(&plane, &reference);
        let scale = direct.force.norm();
        prop_assert!(close3(&direct.force, &reduced.force, scale));
        prop_assert!(close3(&direct.moment, &reduced.moment, scale), "{} vs {}", direct.moment, reduced.moment);
    }

    #[test]
    fn zmp_coincides_with_centroid(samples in compressive_samples(), plane in plane()) {
        let field = ContactRegion::new(samples, plane.clone()).unwrap();
        let c = contact_centroid(&field).unwrap();
        let zmp = zmp_on_plane(&resultant_of_field(&field), &plane).unwrap();
        prop_assert!((zmp - c.point).norm() <= 1e-9, "{zmp} vs {}", c.point);
        let hull = convex_hull(&field.positions()).unwrap();
        prop_assert!(stability_test(&zmp, &hull));
    }

    #[test]
    fn zmp_is_independent_of_the_reduction_point(
        samples in compressive_samples(),
        plane in plane(),
        rx in -1.0..1.0f64, ry in -1.0..1.0f64, rz in -1.0..1.0f64,
    ) {
        let field = ContactRegion::new(samples, plane.clone()).unwrap();
        let w = resultant_of_field(&field);
        let a = zmp_on_plane(&w, &plane).unwrap();
        let b = zmp_on_plane(&w.about(&Vector3::new(rx, ry, rz)), &plane).unwrap();
        prop_assert!((a - b).norm() <= 1e-9);
    }

    #[test]
    fn hull_is_idempotent_and_covers_its_input(pts in points()) {
        let hull = convex_hull(&pts).unwrap();
        let again = convex_hull(hull.vertices()).unwrap();
        prop_assert_eq!(hull.vertices(), again.vertices());
        prop_assert_eq!(hull.shape(), again.shape());
        for p in &pts {
            prop_assert!(hull.contains(p, 1e-9));
        }
    }

    #[test]
    fn hull_ignores_input_order(mut pts in points(), seed in any::<u64>()) {
        let hull = convex_hull(&pts).unwrap();
        let k = (seed as usize) % pts.len();
        pts.rotate_left(k);
        pts.reverse();
        let shuffled = convex_hull(&pts).unwrap();
        prop_assert_eq!(hull.vertices(), shuffled.vertices());
    }

    #[test]
    fn adaptive_forces_balance_the_load(
        l in 0.05..0.4f64,
        load in 1.0..500.0f64,
        frac in 0.0..1.0f64,
        a1 in 0.05..1.4f64, a2 in 0.05..1.4f64, ah in 0.05..1.4f64,
    ) {
        let p = AdaptiveArchParams {
            sole_length: l,
            load,
            com_position: frac * l,
            alpha_1: a1,
            alpha_2: a2,
            alpha_h: ah,
        };
        let f = adaptive_arch_forces(&p);
        prop_assert!((f.total() - load).abs() <= 1e-9 * load);
        if let Some((lo, hi)) = adaptive_admissible_com_range(&p).interval {
            let mid = AdaptiveArchParams { com_position: 0.5 * (lo + hi), ..p.clone() };
            prop_assert!(adaptive_arch_forces(&mid).admissible());
        }
    }

    #[test]
    fn closed_form_matches_dense_solve(
        n in 1usize..10,
        e_bar in 0.5..20.0f64,
        e0 in 0.5..20.0f64,
        kg in 0.0..60.0f64,
        pre in 0.0..1.2f64,
        x_frac in 0.1..0.9f64,
    ) {
        let mut p = SoftFootParams::nominal_with(e_bar, e0).with_links(n, e_bar);
        p.pretension_angle = pre;
        p.load_arm = x_frac * p.arch_span();
        let load = FootLoad::from_mass(kg).unwrap();
        let dense = solve_linear(&assemble_linear_system(&p, &load).unwrap()).unwrap();
        let closed = solve_closed_form(&p, &load).unwrap();
        let scale = dense.q.amax().max(1e-3);
        prop_assert!((&dense.q - &closed).amax() <= 1e-8 * scale, "{} vs {}", dense.q, closed);
    }

    #[test]
    fn point_force_cop_equals_zmp(
        raw in prop::collection::vec((0.0..0.3f64, 0.0..100.0f64), 1..8),
    ) {
        prop_assume!(raw.iter().map(|r| r.1).sum::<f64>() > 1e-6);
        let positions: Vec<f64> = raw.iter().map(|r| r.0).collect();
        let forces: Vec<f64> = raw.iter().map(|r| r.1).collect();
        let cop = cop_from_forces(&forces, &positions).unwrap();
        let zmp = zmp_of_forces(&forces, &positions).unwrap();
        prop_assert!((cop - zmp).abs() <= 1e-12);
        let (lo, hi) = positions.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
        prop_assert!(cop >= lo - 1e-12 && cop <= hi + 1e-12);
    }

    #[test]
    fn log_grid_is_increasing(lo in 0.01..10.0f64, ratio in 1.01..100.0f64, count in 2usize..40) {
        let g = log_grid(lo, lo * ratio, count);
        prop_assert_eq!(g.len(), count);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
