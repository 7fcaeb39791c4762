"""Operator algebra, state prep, and energy matching on truncated spaces."""

import numpy as np
import pytest

from thermoprobe.errors import (
    CutoffInsufficientError,
    InvalidProbeError,
    UnreachableEnergyError,
)
from thermoprobe.fock import (
    FockSpace,
    StateVector,
    covariance_from_state,
    displacement_operator,
    expectation,
    first_moments,
    matrix_exponential,
    number_phase_rotation,
    partial_trace,
    squeeze_operator,
)
from thermoprobe.probes import (
    ProbeSpec,
    match_energy,
    mean_energy,
    prepare,
    probe_from_string,
    probe_to_string,
)


class TestLadder:
    def test_vacuum_annihilation(self):
        space = FockSpace(3)
        a = space.annihilator()
        assert np.allclose(a @ space.vacuum(), 0.0)

    def test_ladder_matrix_element(self):
        space = FockSpace(5)
        a = space.annihilator()
        out = a @ space.basis_vector(2)
        assert np.allclose(out, np.sqrt(2.0) * space.basis_vector(1))

    def test_commutator_on_subblock(self):
        # [a, a†] = 1 holds exactly below the top truncated level
        space = FockSpace(30)
        a, adag = space.ladder()
        comm = a @ adag - adag @ a
        block = comm[:-1, :-1] - np.eye(space.dim - 1)
        assert np.max(np.abs(block)) < 1e-10

    def test_two_mode_operators_commute(self):
        space = FockSpace(6, modes=2)
        a = space.annihilator(0)
        b = space.annihilator(1)
        assert np.max(np.abs(a @ b - b @ a)) < 1e-12
        assert np.max(np.abs(a @ b.conj().T - b.conj().T @ a)) < 1e-12

    def test_mode_out_of_range(self):
        with pytest.raises(Exception):
            FockSpace(5).annihilator(1)


class TestLinearAlgebra:
    def test_expectation_number(self):
        space = FockSpace(8)
        one = StateVector(space, space.basis_vector(1))
        assert expectation(one, space.number_op(0)) == pytest.approx(1.0)

    def test_matrix_exponential_of_zero(self):
        assert np.allclose(matrix_exponential(np.zeros((4, 4))), np.eye(4))

    def test_partial_trace_of_tmsv_is_thermal(self):
        # Schmidt weights of the two-mode squeezed vacuum are geometric with
        # nbar = sinh^2 r; checked against the reduced state numerically.
        r = 1.0
        space = FockSpace(40, modes=2)
        psi = prepare(space, ProbeSpec.tmsv(r))
        reduced = partial_trace(psi, keep=0)
        assert reduced.trace == pytest.approx(1.0, abs=1e-10)
        nbar = np.sinh(r) ** 2
        q = nbar / (nbar + 1.0)
        expected = (1 - q) * q ** np.arange(reduced.space.cutoff)
        assert np.max(np.abs(reduced.populations() - expected)) < 1e-8
        assert abs(nbar - 1.3811) < 5e-4

    def test_partial_trace_preserves_trace(self):
        space = FockSpace(10, modes=2)
        psi = prepare(space, ProbeSpec.noon(4))
        for keep in (0, 1):
            assert partial_trace(psi, keep).trace == pytest.approx(1.0, abs=1e-10)

    def test_displaced_squeezed_moments(self):
        # <x> = sqrt(2) Re alpha; doubled-convention Var(x) of S(r)|0> = e^{-2r}
        space = FockSpace(60)
        alpha, r = 1.2, 0.7
        disp = displacement_operator(space, alpha)
        sq = squeeze_operator(space, r)
        psi = StateVector(space, disp @ sq @ space.vacuum())
        d = first_moments(psi)
        assert d[0] == pytest.approx(np.sqrt(2.0) * alpha, abs=1e-8)
        psi_sq = StateVector(space, sq @ space.vacuum())
        _, cov = covariance_from_state(psi_sq)
        assert cov[0, 0] == pytest.approx(np.exp(-2 * r), abs=1e-6)
        assert cov[1, 1] == pytest.approx(np.exp(2 * r), abs=1e-6)

    def test_number_phase_rotation_matches_unitary(self):
        space = FockSpace(12)
        psi = prepare(space, ProbeSpec.coherent(1.0))
        rho = psi.density_matrix()
        theta = 0.37
        u = matrix_exponential(-1j * theta * space.number_op(None))
        direct = u @ rho.data @ u.conj().T
        assert np.max(np.abs(number_phase_rotation(rho, theta).data - direct)) < 1e-12


class TestPrepare:
    def test_fock_is_basis_vector(self):
        space = FockSpace(10)
        psi = prepare(space, ProbeSpec.fock(4))
        assert np.allclose(psi.data, space.basis_vector(4))

    def test_norm_after_preparation(self):
        space = FockSpace(60)
        for spec in [
            ProbeSpec.coherent(2.0),
            ProbeSpec.squeezed_vacuum(0.8),
            ProbeSpec.cat(2.0, "odd"),
            ProbeSpec.cat(1.5, "even"),
        ]:
            assert prepare(space, spec).norm == pytest.approx(1.0, abs=1e-8)

    def test_small_odd_cat_approaches_single_photon(self):
        # (|α> - |-α>) ∝ α|1> + O(α³)
        space = FockSpace(10)
        psi = prepare(space, ProbeSpec.cat(0.05, "odd"))
        overlap = abs(psi.data[1])
        assert overlap > 0.999

    def test_cat_parity_support(self):
        space = FockSpace(50)
        even = prepare(space, ProbeSpec.cat(1.7, "even")).populations()
        odd = prepare(space, ProbeSpec.cat(1.7, "odd")).populations()
        assert np.max(even[1::2]) < 1e-12
        assert np.max(odd[0::2]) < 1e-12

    def test_tmsv_mean_photon_matches_two_sinh_squared(self):
        # r = asinh(sqrt(3)) targets <n_a + n_b> = 6; cutoff 50/mode keeps
        # the geometric tail below both the prep tolerance and 1e-4 bias.
        r = float(np.arcsinh(np.sqrt(3.0)))
        assert r == pytest.approx(1.316958, abs=1e-6)
        space = FockSpace(50, modes=2)
        psi = prepare(space, ProbeSpec.tmsv(r))
        assert mean_energy(psi, omega=1.0) == pytest.approx(6.0, abs=1e-4)

    def test_tmsv_refused_at_cutoff_30(self):
        # tanh^2(r)^30 ≈ 1.8e-4 of the state lies past n = 29
        space = FockSpace(30, modes=2)
        with pytest.raises(CutoffInsufficientError):
            prepare(space, ProbeSpec.tmsv(1.316958))

    def test_gkp_needs_wide_support(self):
        with pytest.raises(CutoffInsufficientError):
            prepare(FockSpace(60), ProbeSpec.gkp(0.08))
        psi = prepare(FockSpace(170), ProbeSpec.gkp(0.08))
        assert psi.norm == pytest.approx(1.0, abs=1e-8)

    def test_thermal_and_squeezed_thermal_are_density_matrices(self):
        space = FockSpace(60)
        th = prepare(space, ProbeSpec.thermal(0.5))
        th.validate()
        p = th.populations()
        assert p[1] / p[0] == pytest.approx(0.5 / 1.5, rel=1e-9)
        sq = prepare(space, ProbeSpec.squeezed_thermal(0.5, 0.5))
        sq.validate()

    def test_invalid_parity_rejected(self):
        with pytest.raises(InvalidProbeError):
            ProbeSpec.cat(1.0, "sideways")

    def test_family_mode_mismatch(self):
        with pytest.raises(InvalidProbeError):
            prepare(FockSpace(10, modes=2), ProbeSpec.fock(2))
        with pytest.raises(InvalidProbeError):
            prepare(FockSpace(10), ProbeSpec.tmsv(0.5))


class TestEnergy:
    def test_fock_energy(self):
        psi = prepare(FockSpace(10), ProbeSpec.fock(4))
        assert mean_energy(psi, 1.0) == pytest.approx(4.5)

    def test_vacuum_energy(self):
        psi = StateVector(FockSpace(5), FockSpace(5).vacuum())
        assert mean_energy(psi, 1.0) == pytest.approx(0.5)

    def test_svs_energy(self):
        psi = prepare(FockSpace(120), ProbeSpec.squeezed_vacuum(1.443))
        assert mean_energy(psi, 1.0) == pytest.approx(np.sinh(1.443) ** 2 + 0.5, abs=1e-4)
        assert mean_energy(psi, 1.0) == pytest.approx(4.494, abs=0.01)

    @pytest.mark.parametrize(
        "family,kwargs",
        [
            ("fock", {}),
            ("squeezed-vacuum", {}),
            ("coherent", {}),
            ("cat", {"parity": "odd"}),
            ("gkp", {}),
        ],
    )
    def test_match_energy_round_trip_single_mode(self, family, kwargs):
        spec = match_energy(family, 4.5, 1.0, **kwargs)
        # svs at r = 1.44 carries a slow sech*tanh^2m tail; the 1e-6
        # round trip needs the truncation bias below that level
        cutoff = {"gkp": 170, "squeezed-vacuum": 200}.get(family, 80)
        state = prepare(FockSpace(cutoff), spec)
        assert mean_energy(state, 1.0) == pytest.approx(4.5, abs=1e-6)

    @pytest.mark.parametrize(
        "family,kwargs",
        [("tmsv", {}), ("coherent", {"modes": 2}), ("entangled-cat", {"parity": "even"}),
         ("entangled-cat", {"parity": "odd"}), ("noon", {})],
    )
    def test_match_energy_round_trip_two_mode(self, family, kwargs):
        spec = match_energy(family, 6.0, 1.0, **kwargs)
        # tmsv carries a geometric 0.75^n tail; 1e-6 bias needs ~65 levels
        cutoff = 65 if family == "tmsv" else 40
        state = prepare(FockSpace(cutoff, modes=2), spec)
        assert mean_energy(state, 1.0) == pytest.approx(6.0, abs=1e-6)

    def test_match_energy_closed_forms(self):
        assert match_energy("fock", 4.5).param("n0") == 4
        r = match_energy("squeezed-vacuum", 4.5).param("r")
        assert r == pytest.approx(1.4436, abs=1e-4)
        assert match_energy("tmsv", 6.0).param("r") == pytest.approx(1.316958, abs=1e-6)
        assert match_energy("coherent", 6.0, modes=2).param("alpha") == pytest.approx(np.sqrt(3.0))
        assert match_energy("noon", 6.0).param("n") == 6

    def test_odd_cat_alpha_solves_transcendental(self):
        # alpha^2 coth(alpha^2) = 4 => alpha = 1.99933 (within the spec's 1e-3 window of 2.0)
        spec = match_energy("cat", 4.5, parity="odd")
        assert spec.param("alpha") == pytest.approx(1.9993256, abs=1e-4)
        assert spec.param("alpha") == pytest.approx(2.0, abs=1e-3)

    def test_non_integer_fock_target_refused(self):
        with pytest.raises(UnreachableEnergyError):
            match_energy("fock", 4.7)

    def test_unreachable_target(self):
        with pytest.raises(UnreachableEnergyError):
            match_energy("squeezed-vacuum", 0.2)


class TestProbeSerialization:
    def test_round_trip(self):
        specs = [
            ProbeSpec.gkp(0.08, 0.5, 6),
            ProbeSpec.fock(4),
            ProbeSpec.cat(2.0, "odd"),
            ProbeSpec.tmsv(1.3).with_target_energy(6.0),
        ]
        for spec in specs:
            assert probe_from_string(probe_to_string(spec)) == spec

    def test_flat_form_example(self):
        spec = probe_from_string("family=gkp delta=0.08 r=0.5 kmax=6")
        assert spec.param("delta") == 0.08
        assert spec.param("kmax") == 6

    def test_malformed_string(self):
        with pytest.raises(InvalidProbeError):
            probe_from_string("family=fock n0")
        with pytest.raises(InvalidProbeError):
            probe_from_string("n0=4")
        with pytest.raises(InvalidProbeError):
            probe_from_string("family=fock n0=4 bogus=1")
