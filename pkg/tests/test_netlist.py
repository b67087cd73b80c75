"""Netlist export, serialization and graph re-evaluation."""

import json

import numpy as np
import pytest

from spikepid.controller import build_npid, default_config
from spikepid.grids import encode, make_grid
from spikepid.netlist import Netlist, NetlistRuntime, export_netlist
from spikepid.units import SynapseSpec, build_adder, eval_unit, one_hot


def fig2_setup(quantized=False):
    g_in = make_grid(-1, 1, 3)
    g_out = make_grid(-2, 2, 5)
    unit = build_adder([(g_in, 1, 1.0), (g_in, 1, 1.0)], g_out,
                       mode="floor", quantized=quantized, name="adder")
    nl = export_netlist([unit], {"a": g_in, "b": g_in})
    return unit, nl


class TestExport:
    def test_fig2_neuron_counts(self):
        _, nl = fig2_setup()
        inputs = [n for n in nl.neurons if n.layer == "input"]
        units = [n for n in nl.neurons if n.layer != "input"]
        assert len(inputs) == 6   # 2 populations x 3
        assert len(units) == 11   # 6 aggregate + 5 reduce

    def test_quantized_weights_are_even_integers(self):
        _, nl = fig2_setup(quantized=True)
        for s in nl.synapses:
            assert s.weight == int(s.weight)
            assert -256 <= s.weight <= 254
            assert int(s.weight) % 2 == 0

    def test_empty_unit_list(self):
        nl = export_netlist([], {}, wiring=[])
        assert nl.neurons == [] and nl.synapses == []

    def test_npid_counts(self):
        net = build_npid(default_config(n=15, distribution="quadratic"))
        nl = net.export_netlist()
        inputs = [n for n in nl.neurons if n.layer == "input"]
        units = [n for n in nl.neurons if n.layer != "input"]
        assert len(inputs) == 45
        assert len(units) == 93

    def test_recurrent_edge_is_the_only_delay(self):
        net = build_npid(default_config(n=15))
        nl = net.export_netlist()
        delayed = {(s.src.split(".")[0], s.dst.split(".")[0])
                   for s in nl.synapses if s.delay == 1}
        assert delayed == {("integral", "integral")}

    def test_dangling_endpoint_rejected(self):
        _, nl = fig2_setup()
        nl.synapses.append(SynapseSpec("ghost[0]", nl.neurons[0].id, 2, 0))
        with pytest.raises(ValueError):
            nl.validate()

    def test_duplicate_ids_rejected(self):
        _, nl = fig2_setup()
        nl.neurons.append(nl.neurons[0])
        with pytest.raises(ValueError):
            nl.validate()

    def test_port_grid_size_mismatch_rejected(self):
        g3 = make_grid(-1, 1, 3)
        g5 = make_grid(-1, 1, 5)
        unit = build_adder([(g3, 1, 1.0)], g3, name="u")
        with pytest.raises(ValueError):
            export_netlist([unit], {"a": g5}, wiring=[[("input", "a", 0)]])


class TestSerialization:
    def test_json_round_trip(self, tmp_path):
        _, nl = fig2_setup(quantized=True)
        path = tmp_path / "net.json"
        nl.save(path)
        back = Netlist.load(path)
        assert back.neurons == nl.neurons
        assert back.synapses == nl.synapses
        assert back.meta == nl.meta

    def test_save_is_deterministic(self, tmp_path):
        net = build_npid(default_config(n=15, quantized=True))
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        net.export_netlist().save(p1)
        build_npid(default_config(n=15, quantized=True)).export_netlist().save(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_top_level_schema(self, tmp_path):
        _, nl = fig2_setup()
        path = tmp_path / "net.json"
        nl.save(path)
        d = json.loads(path.read_text())
        assert set(d) == {"neurons", "synapses", "meta"}
        assert {"scale", "grids", "mode"} <= set(d["meta"])
        assert set(d["neurons"][0]) == {"id", "layer", "threshold"}
        assert set(d["synapses"][0]) == {"src", "dst", "weight", "delay"}


class TestRuntime:
    @pytest.mark.parametrize("quantized", [False, True])
    def test_single_unit_matches_eval_unit(self, quantized):
        unit, nl = fig2_setup(quantized=quantized)
        rt = NetlistRuntime(nl)
        for i in range(3):
            for j in range(3):
                out, _ = eval_unit(unit, [one_hot(3, i), one_hot(3, j)])
                winners = rt.step({"a": i, "b": j})
                assert winners["adder"] == int(np.flatnonzero(out)[0])

    @pytest.mark.parametrize("quantized", [False, True])
    def test_full_controller_matches_step(self, quantized):
        cfg = default_config(n=15, distribution="quadratic", decay=0.9,
                             quantized=quantized)
        net = build_npid(cfg)
        net.record_raster(True, raster=False)
        rt = NetlistRuntime(net.export_netlist())
        tm, dg = net.grids.target_measurement, net.grids.derivative
        rng = np.random.default_rng(3)
        for k in range(200):
            t = rng.uniform(0, 4)
            y = rng.uniform(0, 4)
            d = rng.uniform(-0.5, 0.5)
            net.step(t, y, d)
            w = rt.step({"target": encode(tm, t), "measurement": encode(tm, y),
                         "derivative": encode(dg, d)})
            tr = net.fetch_trace()
            assert w["error"] == tr.error_bin[k]
            assert w["integral"] == tr.integral_bin[k]
            assert w["control"] == tr.output_bin[k]

    def test_reload_reproduces_bit_exactly(self, tmp_path):
        cfg = default_config(n=15, decay=0.85)
        net = build_npid(cfg)
        net.record_raster(True, raster=False)
        path = tmp_path / "net.json"
        net.export_netlist().save(path)
        rt = NetlistRuntime(Netlist.load(path))
        tm, dg = net.grids.target_measurement, net.grids.derivative
        for k, (t, y, d) in enumerate([(1.5, 0.0, 0.0), (1.5, 0.4, -0.2),
                                       (1.5, 1.2, 0.5), (1.5, 1.6, 0.1)]):
            net.step(t, y, d)
            w = rt.step({"target": encode(tm, t), "measurement": encode(tm, y),
                         "derivative": encode(dg, d)})
            tr = net.fetch_trace()
            assert (w["error"], w["integral"], w["control"]) == (
                tr.error_bin[k], tr.integral_bin[k], tr.output_bin[k])
