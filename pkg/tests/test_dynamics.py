import numpy as np
import pytest

from volterra_qso.catalog import (
    HAMILTONIAN_4,
    LINEAR_3,
    LINEAR_4,
    SINK_CYCLE_4,
    SOURCE_CYCLE_4,
    ZAKHAREVICH,
    two_genotype,
)
from volterra_qso.dynamics import (
    DiagnosticProtocol,
    FaceNotInvariant,
    GraphClaim,
    NumericCategory,
    Trajectory,
    TrajectoryTooShort,
    cesaro,
    cesaro_batch,
    cesaro_from,
    check_invariant_segment,
    classification_report,
    classify,
    estimate_omega_set,
    face_index_map,
    fixed_points_extremal,
    fixed_points_volterra,
    graph_claim,
    iterate,
    iterate_final,
    mass_defect,
    restrict_to_face,
    step,
)
from volterra_qso.qso import all_permutations, random_qso
from volterra_qso.simplex import SUM_TOL, merge_coordinates, sample_interior, vertex
from volterra_qso.tournament import has_any_cycle, sources_and_sinks, tournament_from_extremal
from volterra_qso.volterra import (
    ExtremalVolterra,
    VolterraMatrix,
    apply_volterra,
    conjugate_extremal,
    enumerate_extremal,
    random_volterra,
)

THIRD = 1 / 3
M5 = [THIRD, 0, THIRD, THIRD]
M6 = [THIRD, THIRD, 0, THIRD]

# measured with sample_interior(3, seed=0) and the default checkpoints
ZAKHAREVICH_SEED0_AMPLITUDE = 0.8816546962143603


def test_two_genotype_alpha1_converges_to_first_vertex():
    x = iterate_final(two_genotype(1), [0.3, 0.7], 200)
    np.testing.assert_allclose(x, [1, 0], atol=1e-12)


def test_vertex_orbit_is_constant():
    traj = iterate(HAMILTONIAN_4, vertex(2, 4), 50)
    assert np.all(traj.points == vertex(2, 4))


def test_logistic_coordinate_matches_scalar_recursion():
    traj = iterate(LINEAR_3, [0.3, 0.2, 0.5], 60)
    x3 = traj.points[:, 2]
    phi = [0.5]
    for _ in range(60):
        phi.append(phi[-1] * (2 - phi[-1]))
    np.testing.assert_allclose(x3, phi, atol=1e-12, rtol=0)
    assert np.all(np.diff(x3) >= 0)
    assert abs(x3[-1] - 1) < 1e-12


def test_trajectory_is_lazy_and_deterministic():
    t = Trajectory(ZAKHAREVICH, [0.2, 0.3, 0.5])
    assert t.steps == 0
    p = t[40]
    assert t.steps == 40
    np.testing.assert_array_equal(p, iterate(ZAKHAREVICH, [0.2, 0.3, 0.5], 40).final)


def test_log_space_orbit_matches_direct_application(rng):
    for _ in range(50):
        m = int(rng.integers(2, 6))
        A = random_volterra(m, rng) if rng.random() < 0.5 else ExtremalVolterra(m, tuple(rng.integers(0, 2, m * (m - 1) // 2)))
        x = rng.dirichlet(np.ones(m))
        traj = iterate(A, x, 50)
        y = x
        for n in range(1, 51):
            y = apply_volterra(A, y)
            assert np.max(np.abs(traj.points[n] - y)) <= 1e-12


def test_general_qso_trajectory(rng):
    V = random_qso(3, rng)
    traj = iterate(V, [0.2, 0.3, 0.5], 10)
    assert traj.points.shape == (11, 3)
    np.testing.assert_allclose(traj.points.sum(axis=1), 1, atol=SUM_TOL)


def test_mass_conservation(rng):
    for _ in range(200):
        m = int(rng.integers(2, 6))
        x = rng.dirichlet(np.ones(m))
        assert mass_defect(random_volterra(m, rng), x) <= 1e-12
        assert mass_defect(random_qso(m, rng), x) <= 1e-12
    traj = iterate(HAMILTONIAN_4, sample_interior(4, 3), 5000)
    assert np.max(np.abs(traj.points.sum(axis=1) - 1)) <= SUM_TOL


def test_cesaro_constant_orbit():
    seq = cesaro(iterate(LINEAR_4, vertex(1, 4), 0), [1, 10, 100])
    np.testing.assert_array_equal(seq.means, np.tile(vertex(1, 4), (3, 1)))
    assert seq.amplitude == 0


def test_cesaro_checks_checkpoints():
    with pytest.raises(ValueError):
        cesaro(iterate(LINEAR_4, vertex(1, 4), 0), [10, 5])
    with pytest.raises(ValueError):
        cesaro(iterate(LINEAR_4, vertex(1, 4), 0), [0, 5])


def test_cesaro_matches_plain_mean(rng):
    traj = iterate(ZAKHAREVICH, sample_interior(3, 1), 999)
    seq = cesaro(traj, [10, 100, 1000])
    for c, mean in zip(seq.checkpoints, seq.means):
        np.testing.assert_allclose(mean, traj.points[:c].mean(axis=0), atol=1e-14)
    np.testing.assert_allclose(seq.means.sum(axis=1), 1, atol=SUM_TOL)


def test_zakharevich_cesaro_oscillates():
    seq = cesaro_from(ZAKHAREVICH, sample_interior(3, 0), (10_000, 30_000, 100_000, 300_000, 1_000_000))
    assert seq.amplitude > 0.05
    assert seq.amplitude == pytest.approx(ZAKHAREVICH_SEED0_AMPLITUDE, rel=1e-6)
    np.testing.assert_allclose(seq.means.sum(axis=1), 1, atol=SUM_TOL)


def test_linear_three_cesaro_converges_to_dominant_vertex():
    x0 = sample_interior(3, 0)
    cps = [10_000, 100_000, 1_000_000]
    traj = iterate(LINEAR_3, x0, 1_000_000)
    seq = cesaro(traj, cps)
    assert np.max(np.abs(seq.last - [0, 0, 1])) < 1e-3
    np.testing.assert_allclose(seq.means, cesaro_from(LINEAR_3, x0, cps).means, atol=1e-12)


def test_omega_set_linear_four_is_first_vertex():
    centres = estimate_omega_set(iterate(LINEAR_4, sample_interior(4, 2), 5000))
    assert len(centres) == 1
    np.testing.assert_allclose(centres[0], vertex(1, 4), atol=1e-6)


def test_omega_set_source_cycle_lies_in_face():
    centres = estimate_omega_set(iterate(SOURCE_CYCLE_4, sample_interior(4, 2), 20_000))
    assert centres
    assert all(c[2] < 1e-6 for c in centres)


def test_omega_set_constant_orbit():
    centres = estimate_omega_set(iterate(LINEAR_4, vertex(3, 4), 1000))
    assert len(centres) == 1
    np.testing.assert_array_equal(centres[0], vertex(3, 4))


def test_omega_set_too_short():
    with pytest.raises(TrajectoryTooShort):
        estimate_omega_set(iterate(LINEAR_4, vertex(3, 4), 50))


def test_fixed_points_hamiltonian():
    fps = fixed_points_extremal(HAMILTONIAN_4)
    for i in range(1, 5):
        assert fps.contains(vertex(i, 4))
    assert fps.contains(M5) and fps.contains(M6)
    assert len(fps) == 6
    assert all(fp.residual <= 1e-12 for fp in fps)


def test_fixed_points_sink_and_source_cycle():
    assert fixed_points_extremal(SINK_CYCLE_4).contains([0, THIRD, THIRD, THIRD])
    assert len(fixed_points_extremal(SINK_CYCLE_4)) == 5
    assert fixed_points_extremal(SOURCE_CYCLE_4).contains(M6)
    assert len(fixed_points_extremal(SOURCE_CYCLE_4)) == 5


def test_fixed_points_linear_are_vertices():
    fps = fixed_points_extremal(LINEAR_4)
    assert len(fps) == 4 and all(fp.provenance == "vertex" for fp in fps)


def test_fixed_points_report_continua():
    fps = fixed_points_volterra(VolterraMatrix(np.zeros((3, 3))))
    assert (1, 2, 3) in fps.continua


def test_fixed_points_are_fixed_for_all_m4():
    for E in enumerate_extremal(4):
        for fp in fixed_points_extremal(E):
            assert np.max(np.abs(step(E, fp.point) - fp.point)) <= 1e-12


def test_restrict_to_face_examples():
    assert restrict_to_face(SOURCE_CYCLE_4, 3) == ExtremalVolterra.from_bitstring("101")
    R = restrict_to_face(SINK_CYCLE_4, 1)
    # 2 > 3 > 4 > 2 relabeled to 1 > 2 > 3 > 1
    assert R == ExtremalVolterra.from_bitstring("101")
    assert face_index_map(4, 1) == {1: 2, 2: 3, 3: 4}
    L = restrict_to_face(LINEAR_4, 4)
    assert not has_any_cycle(tournament_from_extremal(L))
    with pytest.raises(FaceNotInvariant):
        restrict_to_face(HAMILTONIAN_4, 2)


@pytest.mark.parametrize(
    "E, claim",
    [
        (two_genotype(0), GraphClaim.REGULAR),
        (ZAKHAREVICH, GraphClaim.NONERGODIC_HAMILTONIAN),
        (LINEAR_3, GraphClaim.REGULAR),
        (HAMILTONIAN_4, GraphClaim.NONERGODIC_HAMILTONIAN),
        (SINK_CYCLE_4, GraphClaim.ERGODIC),
        (SOURCE_CYCLE_4, GraphClaim.NONERGODIC_SOURCE),
        (LINEAR_4, GraphClaim.REGULAR),
    ],
)
def test_graph_claims(E, claim):
    assert classify(E, protocol=None).graph_claim is claim


def test_large_m_is_unclassified():
    E = ExtremalVolterra(5, (True,) * 10)
    assert graph_claim(E)[0] is GraphClaim.UNCLASSIFIED


def test_classification_counts_m4():
    counts = {}
    for E in enumerate_extremal(4):
        c = graph_claim(E)[0]
        counts[c] = counts.get(c, 0) + 1
    assert counts == {
        GraphClaim.NONERGODIC_HAMILTONIAN: 24,
        GraphClaim.ERGODIC: 8,
        GraphClaim.NONERGODIC_SOURCE: 8,
        GraphClaim.REGULAR: 24,
    }


def test_graph_claim_is_permutation_invariant():
    for m in (3, 4):
        for E in enumerate_extremal(m):
            c = graph_claim(E)[0]
            for pi in all_permutations(m):
                assert graph_claim(conjugate_extremal(E, pi))[0] is c


@pytest.mark.parametrize("E", [HAMILTONIAN_4, LINEAR_4])
def test_numeric_diagnostic_is_permutation_covariant(E):
    protocol = DiagnosticProtocol(n_starts=8, checkpoints=(10_000, 30_000, 100_000))
    cat = classify(E, protocol).numeric.category
    for pi in list(all_permutations(4))[::5]:
        assert classify(conjugate_extremal(E, pi), protocol).numeric.category is cat


def test_numeric_diagnostic_categories():
    protocol = DiagnosticProtocol(n_starts=8, checkpoints=(10_000, 30_000, 100_000))
    assert classify(ZAKHAREVICH, protocol).numeric.category is NumericCategory.OSCILLATING
    assert classify(LINEAR_3, protocol).numeric.category is NumericCategory.CONVERGED
    assert classify(SINK_CYCLE_4, protocol).numeric.category is NumericCategory.CONVERGED


def test_cesaro_batch_requires_volterra(rng):
    with pytest.raises(TypeError):
        cesaro_batch(random_qso(3, rng), np.array([[0.2, 0.3, 0.5]]), [10])


def test_dominant_genotype_obeys_logistic_map(rng):
    for E in enumerate_extremal(4):
        _, sinks = sources_and_sinks(tournament_from_extremal(E))
        for i in sinks:
            x = rng.dirichlet(np.ones(4))
            assert abs(step(E, x)[i - 1] - x[i - 1] * (2 - x[i - 1])) < 1e-15


def test_invariant_segment_hamiltonian():
    rep = check_invariant_segment(HAMILTONIAN_4, M5, M6, samples=100, steps=100_000)
    assert rep.max_deviation <= 1e-10
    assert max(rep.endpoint_residuals) == 0
    assert rep.limit_endpoint == "b"
    assert rep.max_limit_distance < 1e-6
    assert rep.max_correction < 1e-14


def test_unconstrained_segment_orbits_drift_off():
    # M6 repels inside F_3, so rounding noise alone carries raw orbits away
    rep = check_invariant_segment(HAMILTONIAN_4, M5, M6, samples=5, steps=2000, constrained=False)
    assert rep.limit_endpoint is None


def test_hamiltonian_lumps_to_zakharevich(rng):
    groups = [[1], [2, 3], [4]]
    for _ in range(1000):
        x = rng.dirichlet(np.ones(4))
        lhs = merge_coordinates(step(HAMILTONIAN_4, x), groups)
        rhs = step(ZAKHAREVICH, merge_coordinates(x, groups))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_classification_report_fields():
    r = classification_report(SOURCE_CYCLE_4, protocol=None)
    assert r["verdict"]["graph_claim"] == "NonErgodic-SourceRecursion"
    assert r["sources"] == [3] and r["sinks"] == []
    assert r["class_size"] == 8
    assert r["cycle_structure"] == "source+3-cycle"
    assert len(r["fixed_points"]) == 5
