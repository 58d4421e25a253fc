use rotorkick::probe::population_map;
use rotorkick::pulse::{apply_double_kick_mask, gaussian_spectrum};
use rotorkick::{
    DensityEnsemble, FieldFrame, KickEvent, PolarizationState, PulseTrainDescriptor, RotorSpec, RotorSystem,
    TimeGrid, VectorField,
};

fn system() -> RotorSystem {
    RotorSystem::new(RotorSpec::he2_metastable()).unwrap()
}

fn shell(sys: &RotorSystem, ens: &DensityEnsemble, j: u32) -> f64 {
    population_map(ens, sys.basis()).shell(j)
}

fn after_train(sys: &RotorSystem, train: &PulseTrainDescriptor) -> DensityEnsemble {
    let e0 = sys.initial_ensemble().unwrap();
    let start = sys.evolve_ensemble_to(&e0, train.first_time().unwrap()).unwrap();
    sys.propagate_train(&start, train).unwrap()
}

fn after_field(sys: &RotorSystem, field: &VectorField, frame: FieldFrame) -> DensityEnsemble {
    let e0 = sys.initial_ensemble().unwrap();
    let start = sys.evolve_ensemble_to(&e0, field.grid().time(0)).unwrap();
    sys.propagate_field(&start, field, frame, 0.5).unwrap()
}

#[test]
fn double_kick_enhances_and_cancels_j3() {
    let sys = system();
    let z = PolarizationState::LinearAlongAxis;
    let single = after_train(&sys, &PulseTrainDescriptor::from_kicks(vec![KickEvent {
        time_fs: 0.0,
        strength: 0.1,
        pol: z,
    }]));
    let p1 = shell(&sys, &single, 3);
    let tau = 1e3 / sys.spec().nu13_thz();
    let on = shell(&sys, &after_train(&sys, &PulseTrainDescriptor::double_kick(tau, 0.2, z).unwrap()), 3);
    let off = shell(&sys, &after_train(&sys, &PulseTrainDescriptor::double_kick(tau / 2.0, 0.2, z).unwrap()), 3);
    assert!((on / p1 - 4.0).abs() < 0.05, "{}", on / p1);
    assert!(off < 0.01 * p1, "{}", off / p1);
}

#[test]
fn zero_field_is_free_evolution() {
    let sys = system();
    let grid = TimeGrid::new(1024, 0.5).unwrap();
    let field = VectorField::zeros(grid).unwrap();
    let e0 = sys.initial_ensemble().unwrap();
    let start = sys.evolve_ensemble_to(&e0, grid.time(0)).unwrap();
    let out = sys.propagate_field(&start, &field, FieldFrame::probe_axis(true), 0.5).unwrap();
    let free = sys.evolve_ensemble_to(&start, grid.time(grid.n - 1)).unwrap();
    for (a, b) in out.members.iter().zip(&free.members) {
        assert!((&a.packet.amplitudes - &b.packet.amplitudes).norm() < 1e-10);
        assert!((a.packet.time_fs - b.packet.time_fs).abs() < 1e-9);
    }
}

#[test]
fn short_pulse_matches_kick() {
    let sys = system();
    let grid = TimeGrid::default();
    for p in [0.3, 1.0] {
        let field = gaussian_spectrum(50.0, 793.0, grid)
            .unwrap()
            .to_time()
            .scaled_to_strength(p)
            .unwrap();
        let exact = after_field(&sys, &field, FieldFrame::probe_axis(true));
        let kick = after_train(&sys, &PulseTrainDescriptor::from_kicks(vec![KickEvent {
            time_fs: 0.0,
            strength: p,
            pol: PolarizationState::LinearAlongAxis,
        }]));
        let a = population_map(&exact, sys.basis());
        let b = population_map(&kick, sys.basis());
        let worst = a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|(x, y)| (x.population - y.population).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "P = {p}: {worst}");
    }
}

#[test]
fn shaped_double_kick_matches_descriptor() {
    let sys = system();
    let base = gaussian_spectrum(50.0, 793.0, TimeGrid::default()).unwrap();
    let field = apply_double_kick_mask(&base, 440.0)
        .unwrap()
        .to_time()
        .scaled_to_strength(0.6)
        .unwrap();
    let exact = after_field(&sys, &field, FieldFrame::probe_axis(true));
    let train = PulseTrainDescriptor::double_kick(440.0, 0.6, PolarizationState::LinearAlongAxis).unwrap();
    let kick = after_train(&sys, &train);
    let (a, b) = (shell(&sys, &exact, 3), shell(&sys, &kick, 3));
    assert!((a / b - 1.0).abs() < 0.1, "{a} vs {b}");
}

#[test]
fn field_before_stamp_is_rejected() {
    let sys = system();
    let grid = TimeGrid::new(1024, 0.5).unwrap();
    let field = VectorField::zeros(grid).unwrap();
    let e0 = sys.initial_ensemble().unwrap();
    assert!(sys.propagate_field(&e0, &field, FieldFrame::probe_axis(true), 0.5).is_err());
}

#[test]
fn coarse_step_is_a_config_error() {
    let sys = system();
    let grid = TimeGrid::new(1024, 1.0).unwrap();
    let field = VectorField::zeros(grid).unwrap();
    let e0 = sys.initial_ensemble().unwrap();
    let start = sys.evolve_ensemble_to(&e0, grid.time(0)).unwrap();
    let err = sys.propagate_field(&start, &field, FieldFrame::probe_axis(true), 0.5).unwrap_err();
    assert!(err.is_config_error());
}

#[test]
fn circular_kick_is_unsupported() {
    let sys = system();
    let e0 = sys.initial_ensemble().unwrap();
    let k = KickEvent {
        time_fs: 0.0,
        strength: 0.1,
        pol: PolarizationState::CircularPlus,
    };
    assert!(sys.apply_kick(&e0.members[0].packet, &k).is_err());
}
