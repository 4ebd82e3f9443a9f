import math

import pytest

from gouysort import (
    ArmLengthMismatchError,
    BeamParameter,
    InterferometerConfig,
    LGMode,
    MisalignmentSpec,
    OpticalPath,
    PortResult,
    Superposition,
    accumulate_gouy,
    analytic_port_split,
    calibrate_ref_phase,
    simulate_port_fields,
    solve_all_distances,
    visibility_sweep,
)
from gouysort.interferometer import write_sweep_csv

LAMBDA = 810e-9
BEAM = BeamParameter.from_waist(1e-3, LAMBDA)

# q-matched gap solution for the (500, 40, 300) mm triple, frozen from
# solve_distances (residual ~4e-15 m)
D1_HALF = 0.5596081687533834
D2_HALF = 0.3427135579640067


@pytest.fixture(scope="module")
def half_pi_cfg():
    return InterferometerConfig.three_lens(0.5, D1_HALF, 0.04, D2_HALF, 0.3, BEAM)


def delta_gouy(cfg):
    resA = accumulate_gouy(cfg.qIn, cfg.armA)
    resB = accumulate_gouy(cfg.qIn, cfg.armB)
    return resA.gouyAccumulated - resB.gouyAccumulated


class TestConfigConstruction:
    def test_arm_length_mismatch_raises(self):
        with pytest.raises(ArmLengthMismatchError):
            InterferometerConfig(
                armA=OpticalPath.free_space(1.0),
                armB=OpticalPath.free_space(0.9),
                qIn=BEAM,
            )

    def test_mismatch_override(self):
        cfg = InterferometerConfig(
            armA=OpticalPath.free_space(1.0),
            armB=OpticalPath.free_space(0.9),
            qIn=BEAM,
            allow_length_mismatch=True,
        )
        assert cfg.allow_length_mismatch

    def test_three_lens_arms_equal(self, half_pi_cfg):
        assert half_pi_cfg.armA.geometric_length == pytest.approx(
            half_pi_cfg.armB.geometric_length, abs=1e-12
        )


class TestEnergyConservation:
    @pytest.mark.parametrize("p", [0, 1, 2, 3])
    def test_single_modes(self, half_pi_cfg, p):
        port = simulate_port_fields(half_pi_cfg, LGMode(p, 0))
        assert port.I1 + port.I2 == pytest.approx(1.0, abs=1e-8)
        assert port.I1 >= -1e-12 and port.I2 >= -1e-12

    def test_superposition(self, half_pi_cfg):
        s = Superposition((LGMode(0, 0, 1.0), LGMode(2, 0, 1.0)))
        port = simulate_port_fields(half_pi_cfg, s)
        assert port.I1 + port.I2 == pytest.approx(1.0, abs=1e-8)


class TestAnalyticAgreement:
    def test_matched_q_matches_closed_form(self, half_pi_cfg):
        delta = delta_gouy(half_pi_cfg)
        for p in range(4):
            mode = LGMode(p, 0)
            f1, f2 = analytic_port_split(delta, half_pi_cfg.refPhase, mode)
            port = simulate_port_fields(half_pi_cfg, mode)
            assert port.I1 == pytest.approx(f1, abs=1e-6)
            assert port.I2 == pytest.approx(f2, abs=1e-6)

    def test_split_sums_to_one(self):
        f1, f2 = analytic_port_split(0.731, 1.234, LGMode(3, 2))
        assert f1 + f2 == 1.0

    def test_split_reference_values(self):
        # theta = m*pi/2: m = 2 -> full port 2, m = 4 -> full port 1
        assert analytic_port_split(math.pi / 2, 0.0, LGMode(0, 1)) == pytest.approx((0.0, 1.0), abs=1e-15)
        assert analytic_port_split(math.pi / 2, 0.0, LGMode(1, 1)) == pytest.approx((1.0, 0.0), abs=1e-15)
        assert analytic_port_split(math.pi / 2, 0.0, LGMode(0, 0))[0] == pytest.approx(0.5, abs=1e-15)


class TestCalibration:
    def test_calibrated_phase_maximizes_visibility(self, half_pi_cfg):
        from dataclasses import replace

        delta = calibrate_ref_phase(half_pi_cfg, LGMode(0, 0))
        assert 0.0 <= delta < 2.0 * math.pi
        best = simulate_port_fields(replace(half_pi_cfg, refPhase=delta), LGMode(0, 0))
        assert best.visibility == pytest.approx(1.0, abs=1e-8)
        for offset in (0.3, 1.1, 2.9):
            other = simulate_port_fields(
                replace(half_pi_cfg, refPhase=delta + offset), LGMode(0, 0)
            )
            assert other.visibilityAbs < best.visibilityAbs + 1e-12

    def test_parity_alternation_after_calibration(self, half_pi_cfg):
        # near-pi/2 sorter calibrated on p=0: signed visibilities alternate with p
        from dataclasses import replace

        delta = calibrate_ref_phase(half_pi_cfg, LGMode(0, 0))
        cfg = replace(half_pi_cfg, refPhase=delta)
        signs = [
            math.copysign(1.0, simulate_port_fields(cfg, LGMode(p, 0)).visibility)
            for p in range(4)
        ]
        assert signs == [1.0, -1.0, 1.0, -1.0]

    def test_phase_in_principal_range(self, half_pi_cfg):
        for p in range(3):
            delta = calibrate_ref_phase(half_pi_cfg, LGMode(p, 0))
            assert 0.0 <= delta < 2.0 * math.pi


class TestVisibilitySweep:
    def test_misaligned_p1_is_maximum(self, half_pi_cfg):
        mis = MisalignmentSpec(
            w0Actual=0.96e-3,
            zOffset=-0.2,
            d1Error=3e-3,
            d2Error=3e-3,
            calibrationMode=LGMode(2, 0),
        )
        modes = [LGMode(p, 0) for p in range(4)]
        results = visibility_sweep(half_pi_cfg, mis, modes)
        magnitudes = {mode.p: abs(v) for mode, v in results}
        assert magnitudes[1] == max(magnitudes.values())

    def test_aligned_sweep_reaches_unity(self, half_pi_cfg):
        mis = MisalignmentSpec(w0Actual=1e-3, calibrationMode=LGMode(0, 0))
        results = visibility_sweep(half_pi_cfg, mis, [LGMode(0, 0)])
        assert abs(results[0][1]) == pytest.approx(1.0, abs=1e-8)

    def test_invalid_waist_rejected(self):
        with pytest.raises(ValueError):
            MisalignmentSpec(w0Actual=0.0)


class TestSweepCsv:
    def test_columns(self, tmp_path):
        rows = [(LGMode(0, 0), PortResult(0.75, 0.25))]
        path = tmp_path / "sweep.csv"
        write_sweep_csv(path, rows, comments=["demo"])
        text = path.read_text().splitlines()
        assert text[0] == "# demo"
        assert text[1] == "p,ell,m,I1,I2,visibility"
        assert text[2] == "0,0,1,0.75,0.25,0.5"


class TestSolvedConfigIsHalfPi:
    def test_phase_near_three_half_pi(self, half_pi_cfg):
        delta = delta_gouy(half_pi_cfg)
        assert delta == pytest.approx(1.4949 * math.pi, abs=0.001 * math.pi)

    def test_q_matched(self, half_pi_cfg):
        resA = accumulate_gouy(BEAM, half_pi_cfg.armA)
        resB = accumulate_gouy(BEAM, half_pi_cfg.armB)
        assert abs(resA.qOut.q - resB.qOut.q) < 1e-9

    def test_solver_reproduces_frozen_solution(self):
        roots = solve_all_distances(0.5, 0.04, 0.3, BEAM)
        matches = [
            r for r in roots
            if abs(r[0] - D1_HALF) < 1e-9 and abs(r[1] - D2_HALF) < 1e-9
        ]
        assert len(matches) == 1
        assert matches[0][2] < 1e-10
