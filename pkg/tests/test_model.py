import numpy as np
import pytest

from edgeoffload.model import (
    Assignment,
    Cap,
    Decision,
    Device,
    Instance,
    Task,
    batch_latency,
    energy,
    g_coeff,
    objective,
)

from conftest import make_instance, random_decision


def reference_instance(jc=350.0):
    device = Device(r0=4e8, p_comp=0.8, p_tx=1.258, p_rx=1.181, jc=jc, ec=1.5e-10)
    cap = Cap(r=2e9, c_ul=1e6, c_dl=1e6)
    task = Task(alpha=4e6, beta=0.8e6, omega=1.32e9)
    return Instance(device, (cap,), (task,), 0.5, 0.5)


class TestTypes:
    def test_task_validation(self):
        with pytest.raises(ValueError, match="alpha"):
            Task(alpha=0, beta=1, omega=1)
        with pytest.raises(ValueError, match="beta"):
            Task(alpha=1, beta=-1, omega=1)
        with pytest.raises(ValueError, match="omega"):
            Task(alpha=1, beta=0, omega=0)
        Task(alpha=1, beta=0, omega=1)  # beta may be zero

    def test_device_validation(self):
        with pytest.raises(ValueError, match="r0"):
            Device(r0=0, p_comp=1, p_tx=1, p_rx=1, jc=1, ec=1)
        # zero compression cost is a legal no-op compressor
        dev = Device(r0=1, p_comp=1, p_tx=1, p_rx=1, jc=0.0, ec=0.0)
        assert dev.p_compr == 0.0

    def test_p_compr_derived(self):
        dev = Device(r0=1, p_comp=1, p_tx=1, p_rx=1, jc=350.0, ec=1.5e-10)
        assert dev.p_compr == pytest.approx(5.25e-8)

    def test_cap_validation(self):
        with pytest.raises(ValueError, match="c_ul"):
            Cap(r=1, c_ul=0, c_dl=1)

    def test_instance_validation(self):
        dev = Device(r0=1, p_comp=1, p_tx=1, p_rx=1, jc=1, ec=1)
        cap = Cap(r=1, c_ul=1, c_dl=1)
        task = Task(alpha=1, beta=1, omega=1)
        with pytest.raises(ValueError, match="task"):
            Instance(dev, (cap,), (), 0.5, 0.5)
        with pytest.raises(ValueError, match="access point"):
            Instance(dev, (), (task,), 0.5, 0.5)
        with pytest.raises(ValueError, match="lambda_t"):
            Instance(dev, (cap,), (task,), 1.5, 0.5)

    def test_decision_gamma_range(self):
        with pytest.raises(ValueError, match="gamma"):
            Decision(Assignment((0,)), 1.2)

    def test_assignment_matrix(self):
        x = Assignment((0, 2, 1)).matrix(3)
        assert x.shape == (3, 3)
        assert np.array_equal(x.sum(axis=1), np.ones(3))
        assert x[1, 2] == 1.0


class TestGCoeff:
    def test_local_case(self):
        inst = reference_instance()
        # omega = 330 * 4e6 cycles on a 4e8 cycles/s CPU
        assert g_coeff(inst, 0, 0, 0.7) == pytest.approx(3.3, rel=1e-12)

    def test_offloaded_no_compression(self):
        inst = reference_instance()
        # upload 4 s + compute 0.66 s + download 0.8 s
        assert g_coeff(inst, 0, 1, 0.0) == pytest.approx(5.46, rel=1e-12)

    def test_offloaded_full_compression(self):
        inst = reference_instance(jc=350.0)
        # compress 3.5 s + decompress 0.7 s + compute 0.66 s + download 0.8 s
        assert g_coeff(inst, 0, 1, 1.0) == pytest.approx(5.66, rel=1e-12)

    def test_local_independent_of_gamma(self):
        inst = reference_instance()
        assert g_coeff(inst, 0, 0, 0.0) == g_coeff(inst, 0, 0, 1.0)

    def test_index_errors(self):
        inst = reference_instance()
        with pytest.raises(IndexError):
            g_coeff(inst, 1, 0, 0.0)
        with pytest.raises(IndexError):
            g_coeff(inst, 0, 2, 0.0)
        with pytest.raises(IndexError):
            g_coeff(inst, -1, 0, 0.0)

    def test_gamma_out_of_range(self):
        with pytest.raises(ValueError, match="gamma"):
            g_coeff(reference_instance(), 0, 1, 1.5)


class TestBatchLatency:
    def test_empty_cpu_has_zero_latency(self, rng):
        inst = make_instance(rng, 3, 2)
        dec = Decision(Assignment((0, 0, 0)), 0.3)
        t = batch_latency(inst, dec)
        assert t[1] == 0.0 and t[2] == 0.0

    def test_all_local(self, rng):
        inst = make_instance(rng, 4, 2)
        dec = Decision(Assignment((0, 0, 0, 0)), 0.0)
        t = batch_latency(inst, dec)
        expected = sum(task.omega for task in inst.tasks) / inst.device.r0
        assert t[0] == pytest.approx(expected, rel=1e-12)

    def test_single_offloaded_task(self):
        inst = reference_instance()
        t = batch_latency(inst, Decision(Assignment((1,)), 0.0))
        assert t[0] == 0.0
        assert t[1] == pytest.approx(5.46, rel=1e-12)

    def test_rejects_mismatched_assignment(self, rng):
        inst = make_instance(rng, 3, 2)
        with pytest.raises(ValueError, match="assignment"):
            batch_latency(inst, Decision(Assignment((0, 0)), 0.0))
        with pytest.raises(ValueError, match="cpu"):
            batch_latency(inst, Decision(Assignment((0, 0, 5)), 0.0))


class TestEnergy:
    def test_zero_gamma_means_zero_compression_energy(self, rng):
        inst = make_instance(rng, 3, 2)
        dec = Decision(Assignment((1, 2, 0)), 0.0)
        _, e_compr, _ = energy(inst, dec)
        assert e_compr == 0.0

    def test_all_local_no_radio_energy(self, rng):
        inst = make_instance(rng, 3, 2)
        dec = Decision(Assignment((0, 0, 0)), 0.8)
        e_comp, e_compr, e_tr = energy(inst, dec)
        assert e_compr == 0.0 and e_tr == 0.0
        assert e_comp > 0.0

    def test_compression_energy_value(self):
        inst = reference_instance(jc=350.0)
        _, e_compr, _ = energy(inst, Decision(Assignment((1,)), 0.5))
        # (350 * 1.5e-10 J/bit) * 4e6 bits * 0.5
        assert e_compr == pytest.approx(0.105, rel=1e-12)

    def test_download_energy_not_scaled_by_gamma(self):
        inst = reference_instance()
        _, _, e_tr_0 = energy(inst, Decision(Assignment((1,)), 0.0))
        _, _, e_tr_1 = energy(inst, Decision(Assignment((1,)), 1.0))
        rx = inst.device.p_rx * inst.tasks[0].beta / inst.caps[0].c_dl
        assert e_tr_1 == pytest.approx(rx, rel=1e-12)
        assert e_tr_0 == pytest.approx(rx + inst.device.p_tx * 4.0, rel=1e-12)


class TestObjective:
    def test_zero_latency_weight(self, rng):
        inst = make_instance(rng, 3, 2, lambda_t=0.0, lambda_e=0.7)
        dec = random_decision(rng, inst)
        bd = objective(inst, dec)
        assert bd.psi == pytest.approx(0.7 * bd.energy, rel=1e-12)

    def test_all_local_reference_value(self):
        inst = reference_instance()
        bd = objective(inst, Decision(Assignment((0,)), 0.0))
        # 0.5 * 3.3 s + 0.5 * (0.8 W * 3.3 s)
        assert bd.psi == pytest.approx(2.97, rel=1e-12)

    def test_breakdown_consistency(self, rng):
        for _ in range(20):
            inst = make_instance(rng, int(rng.integers(1, 6)), int(rng.integers(1, 4)))
            dec = random_decision(rng, inst)
            bd = objective(inst, dec)
            assert bd.latency == max(bd.per_cpu_latency)
            assert bd.energy == pytest.approx(bd.e_comp + bd.e_compr + bd.e_tr, rel=1e-12)
            assert all(v >= 0.0 for v in bd.per_cpu_latency)
            assert min(bd.e_comp, bd.e_compr, bd.e_tr, bd.psi) >= 0.0
            assert bd.psi == pytest.approx(
                inst.lambda_t * bd.latency + inst.lambda_e * bd.energy, rel=1e-12
            )


class TestInvariants:
    def test_latency_affine_in_gamma(self, rng):
        for _ in range(30):
            inst = make_instance(rng, int(rng.integers(1, 7)), int(rng.integers(1, 4)))
            assignment = random_decision(rng, inst).assignment
            t0 = batch_latency(inst, Decision(assignment, 0.0))
            t1 = batch_latency(inst, Decision(assignment, 1.0))
            g = float(rng.uniform())
            tg = batch_latency(inst, Decision(assignment, g))
            expected = (1.0 - g) * t0 + g * t1
            assert np.allclose(tg, expected, rtol=1e-12, atol=1e-12)

    def test_weight_scaling_doubles_psi(self, rng):
        inst = make_instance(rng, 4, 2, lambda_t=0.25, lambda_e=0.4)
        doubled = Instance(inst.device, inst.caps, inst.tasks, 0.5, 0.8)
        for _ in range(10):
            dec = random_decision(rng, inst)
            assert objective(doubled, dec).psi == pytest.approx(
                2.0 * objective(inst, dec).psi, rel=1e-12
            )

    def test_zero_jc_reduces_to_uncompressed_model(self, rng):
        inst = make_instance(rng, 4, 2, jc=0.0)
        inst = Instance(
            Device(inst.device.r0, inst.device.p_comp, inst.device.p_tx,
                   inst.device.p_rx, 0.0, 0.0),
            inst.caps, inst.tasks, 0.5, 0.5,
        )
        for _ in range(10):
            dec = random_decision(rng, inst)
            at_zero = Decision(dec.assignment, 0.0)
            t_g = batch_latency(inst, dec)
            t_0 = batch_latency(inst, at_zero)
            # with no compression cost only the uploaded fraction changes
            uplink = np.zeros(inst.n_caps + 1)
            for i, k in enumerate(dec.assignment.cpu_of):
                if k > 0:
                    uplink[k] += inst.tasks[i].alpha / inst.caps[k - 1].c_ul
            assert np.allclose(t_g, t_0 - dec.gamma * uplink, rtol=1e-12, atol=1e-12)
            e_g = energy(inst, dec)
            assert e_g[1] == 0.0
            if dec.gamma == 0.0:
                assert e_g == energy(inst, at_zero)
