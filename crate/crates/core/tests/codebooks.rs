use airybeam::airy::{trajectory, CodewordMeta, Sigma};
use airybeam::codebooks::{
    boundary_target, fs1c_generate, hfac_generate, nupc_generate, probe_pair, select_target, CodebookKind,
    HfacConfig, PolarGrid, TargetClamp,
};
use airybeam::feasibility::{waypoint_feasible, xs_max, xs_min};
use airybeam::geometry::{Point, Scene};
use approx::assert_abs_diff_eq;

fn reference_grid(s: &Scene) -> PolarGrid {
    PolarGrid::new(s, 0.5, 0.221, 0.02).unwrap()
}

fn unit_modulus(cw: &airybeam::Codeword) -> bool {
    let a = 1.0 / (cw.len() as f64).sqrt();
    cw.weights.iter().all(|w| (w.norm() - a).abs() < 1e-12)
}

#[test]
fn nupc_entries_are_sound() {
    let s = Scene::reference();
    for sigma in [Sigma::Up, Sigma::Down] {
        let cb = nupc_generate(&s, &reference_grid(&s), sigma, TargetClamp::Intent).unwrap();
        assert_eq!(cb.kind, CodebookKind::Nupc);
        assert!(!cb.is_empty());
        for cw in &cb.entries {
            assert!(unit_modulus(cw));
            let (wp, tg) = (cw.meta.waypoint().unwrap(), cw.meta.target().unwrap());
            assert!(waypoint_feasible(wp, tg, sigma, s.d_t()));
            assert!(s.in_los_region(wp));
            let edge = s.x_c() + sigma.sign() * s.d_r() / 2.0;
            assert!((tg.x - s.x_c()) * sigma.sign() >= 0.0 && (tg.x - edge) * sigma.sign() <= 1e-15);
        }
    }
}

#[test]
fn nupc_keeps_every_admissible_candidate_once() {
    let s = Scene::reference();
    let grid = reference_grid(&s);
    let sigma = Sigma::Up;
    let best = Point::new(s.z_r(), s.x_c() + s.d_r() / 2.0);
    let mut expected = Vec::new();
    for m in 0..grid.m {
        for n in 0..grid.n {
            let wp = grid.candidate(m, n);
            if wp.z < s.z_r() * (1.0 - 1e-12) && s.in_los_region(wp) && waypoint_feasible(wp, best, sigma, s.d_t()) {
                expected.push(wp);
            }
        }
    }
    let cb = nupc_generate(&s, &grid, sigma, TargetClamp::Intent).unwrap();
    let got: Vec<Point> = cb.entries.iter().map(|c| c.meta.waypoint().unwrap()).collect();
    assert_eq!(got.len() + cb.skipped.total_skipped(), grid.len());
    assert_eq!(cb.skipped.total_skipped() - cb.skipped.outside_los - cb.skipped.beyond_boundary, 0);
    assert_eq!(got, expected);
    assert_eq!(cb.len(), 187);
}

#[test]
fn nupc_targets_follow_the_clamp() {
    let s = Scene::reference();
    let cb = nupc_generate(&s, &reference_grid(&s), Sigma::Up, TargetClamp::Intent).unwrap();
    for cw in &cb.entries {
        let wp = cw.meta.waypoint().unwrap();
        let x_bound = boundary_target(wp, s.z_r(), s.d_t(), Sigma::Up);
        let want = select_target(x_bound, s.x_c(), s.d_r(), Sigma::Up, TargetClamp::Intent);
        assert_eq!(cw.meta.target().unwrap().x, want);
    }
    let literal = nupc_generate(&s, &reference_grid(&s), Sigma::Up, TargetClamp::Literal).unwrap();
    assert!(literal
        .entries
        .iter()
        .all(|c| c.meta.target().unwrap().x == s.d_r() / 2.0));
}

#[test]
fn on_axis_candidate_survives_both_directions() {
    let s = Scene::reference();
    // phi_max on the lattice so that n = 25 is exactly phi = 0.
    let grid = PolarGrid::with_phi_max(&s, 0.5, 0.221, 0.02, 0.5).unwrap();
    let m = 3;
    let axis = grid.candidate(m, 25);
    assert_eq!(axis.x, 0.0);
    for sigma in [Sigma::Up, Sigma::Down] {
        let cb = nupc_generate(&s, &grid, sigma, TargetClamp::Intent).unwrap();
        assert!(cb.entries.iter().any(|c| c.meta.waypoint() == Some(axis)));
    }
}

#[test]
fn nupc_directions_mirror_each_other() {
    let s = Scene::reference();
    // The slope lattice starts at -phi_max, so it is only symmetric when
    // 2 phi_max is a whole number of steps.
    let grid = PolarGrid::with_phi_max(&s, 0.5, 0.221, 0.02, 0.5).unwrap();
    let up = nupc_generate(&s, &grid, Sigma::Up, TargetClamp::Intent).unwrap();
    let down = nupc_generate(&s, &grid, Sigma::Down, TargetClamp::Intent).unwrap();
    assert_eq!(up.len(), down.len());
    for cw in &up.entries {
        let wp = cw.meta.waypoint().unwrap();
        let twin = down
            .entries
            .iter()
            .find(|d| {
                let w = d.meta.waypoint().unwrap();
                w.z == wp.z && (w.x + wp.x).abs() < 1e-12
            })
            .expect("mirror waypoint present");
        assert_abs_diff_eq!(twin.meta.target().unwrap().x, -cw.meta.target().unwrap().x, epsilon = 1e-12);
        let n = cw.len();
        for i in (0..n).step_by(17) {
            assert!((cw.weights[i] - twin.weights[n - 1 - i]).norm() < 1e-9);
        }
    }
}

#[test]
fn fs1c_reference_book() {
    let s = Scene::reference();
    let cb = fs1c_generate(&s, 0.5, 0.02205, Sigma::Up).unwrap();
    assert_eq!(cb.len(), 21);
    assert_eq!(cb.skipped.total_skipped(), 0);
    let xs: Vec<f64> = cb.entries.iter().map(|c| c.meta.waypoint().unwrap().x).collect();
    let xr: Vec<f64> = cb.entries.iter().map(|c| c.meta.target().unwrap().x).collect();
    // Bijective and strictly increasing, hitting both Rx edges.
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
    assert!(xr.windows(2).all(|w| w[1] > w[0]));
    assert_abs_diff_eq!(xr[0], -s.d_r() / 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(xr[20], s.d_r() / 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(xs[20], xs_max(0.5, 3.0, 0.0, s.d_t()), epsilon = 1e-15);
    let step = cb.params["step"];
    assert!((step - 0.02205).abs() < 0.001);
    for cw in &cb.entries {
        assert!(unit_modulus(cw));
    }
}

#[test]
fn fs1c_trajectories_shift_monotonically() {
    let s = Scene::reference();
    let cb = fs1c_generate(&s, 0.5, 0.02205, Sigma::Up).unwrap();
    let params: Vec<_> = cb.entries.iter().map(|c| c.meta.params().unwrap()).collect();
    for k in 1..=300 {
        let z = 3.0 * k as f64 / 300.0;
        let x: Vec<f64> = params
            .iter()
            .map(|p| trajectory(z, p, s.beam_waist(), s.wavelength).unwrap())
            .collect();
        assert!(x.windows(2).all(|w| w[1] > w[0]), "non-monotone at z = {z}");
    }
}

#[test]
fn fs1c_down_book_is_the_mirror() {
    let s = Scene::reference();
    let up = fs1c_generate(&s, 0.5, 0.02205, Sigma::Up).unwrap();
    let down = fs1c_generate(&s, 0.5, 0.02205, Sigma::Down).unwrap();
    assert_eq!(up.len(), down.len());
    for (a, b) in up.entries.iter().zip(&down.entries) {
        assert_abs_diff_eq!(a.meta.waypoint().unwrap().x, -b.meta.waypoint().unwrap().x, epsilon = 1e-15);
        assert_abs_diff_eq!(a.meta.target().unwrap().x, -b.meta.target().unwrap().x, epsilon = 1e-15);
        assert_abs_diff_eq!(
            down.params["xs_min"],
            xs_min(0.5, 3.0, 0.0, s.d_t()),
            epsilon = 1e-15
        );
    }
}

#[test]
fn fs1c_rejects_bad_depths() {
    let s = Scene::reference();
    assert_eq!(fs1c_generate(&s, 0.0, 0.02, Sigma::Up).unwrap_err().kind(), "domain");
    assert_eq!(fs1c_generate(&s, 3.0, 0.02, Sigma::Up).unwrap_err().kind(), "domain");
    assert_eq!(fs1c_generate(&s, 0.5, 0.0, Sigma::Up).unwrap_err().kind(), "domain");
}

#[test]
fn hfac_reference_size_and_order() {
    let s = Scene::reference();
    let cb = hfac_generate(&s, &HfacConfig::default()).unwrap();
    assert_eq!(cb.len(), 324);
    assert_eq!(cb.params["levels_curvature"], 9.0);
    assert_eq!(cb.params["levels_focal"], 3.0);
    assert_eq!(cb.params["levels_steering"], 12.0);
    // 2 probes + 21 FS1C codewords against the full grid.
    assert_abs_diff_eq!(1.0 - 23.0 / cb.len() as f64, 0.929, epsilon = 5e-4);
    let p: Vec<_> = cb.entries.iter().map(|c| c.meta.params().unwrap()).collect();
    assert!(p[0].b < 0.0 && p[0].sigma == Sigma::Down);
    assert_eq!(p[0].f, p[11].f);
    assert!(p[11].theta > p[0].theta);
    assert!(p[12].f > p[0].f);
    assert!(cb.entries.iter().all(unit_modulus));
    assert!(cb.entries.iter().all(|c| matches!(c.meta, CodewordMeta::Profile { .. })));
}

#[test]
fn probes_mirror_on_symmetric_scene() {
    let s = Scene::reference();
    let (up, down) = probe_pair(&s, 0.5).unwrap();
    assert_abs_diff_eq!(up.meta.waypoint().unwrap().x, 0.212725, epsilon = 5e-6);
    let n = up.len();
    for i in 0..n {
        assert!((up.weights[i] - down.weights[n - 1 - i]).norm() < 1e-9);
    }
}

#[test]
fn generation_is_deterministic() {
    let s = Scene::reference();
    let a = nupc_generate(&s, &reference_grid(&s), Sigma::Up, TargetClamp::Intent).unwrap();
    let b = nupc_generate(&s, &reference_grid(&s), Sigma::Up, TargetClamp::Intent).unwrap();
    assert_eq!(a.metadata_json(), b.metadata_json());
    assert_eq!(a, b);
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    a.write_table_csv(&mut t1).unwrap();
    b.write_table_csv(&mut t2).unwrap();
    assert_eq!(t1, t2);
    let text = String::from_utf8(t1).unwrap();
    assert!(text.starts_with("index,kind,z_b,x_s,x_r,B,F,theta,sigma\n0,nupc,"));
    assert_eq!(text.lines().count(), a.len() + 1);
}
