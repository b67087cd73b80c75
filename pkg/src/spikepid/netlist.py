"""Netlist export/import: the network as a flat neuron + synapse graph.

The netlist is the serializable form of one or more adder units plus
their input populations.  Neuron ids are structured ("error.agg_pos[3]",
"target[7]") but the file is a plain graph; NetlistRuntime re-evaluates
it from the graph alone, which gives an independent check that the
exported wiring reproduces the units' behavior bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .units import LAYER_INPUT, NeuronSpec, SynapseSpec

__all__ = ["Netlist", "export_netlist", "NetlistRuntime"]


@dataclass
class Netlist:
    neurons: list[NeuronSpec]
    synapses: list[SynapseSpec]
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        ids = [n.id for n in self.neurons]
        id_set = set(ids)
        if len(ids) != len(id_set):
            raise ValueError("duplicate neuron ids in netlist")
        for s in self.synapses:
            if s.src not in id_set or s.dst not in id_set:
                raise ValueError(f"dangling synapse endpoint: {s.src} -> {s.dst}")
            if s.delay not in (0, 1):
                raise ValueError(f"synapse delay must be 0 or 1, got {s.delay}")

    def to_dict(self) -> dict:
        return {
            "neurons": [
                {"id": n.id, "layer": n.layer, "threshold": n.threshold}
                for n in self.neurons
            ],
            "synapses": [
                {"src": s.src, "dst": s.dst, "weight": s.weight, "delay": s.delay}
                for s in self.synapses
            ],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Netlist":
        nl = cls(
            neurons=[
                NeuronSpec(n["id"], n["layer"], n["threshold"]) for n in d["neurons"]
            ],
            synapses=[
                SynapseSpec(s["src"], s["dst"], s["weight"], s["delay"])
                for s in d["synapses"]
            ],
            meta=d.get("meta", {}),
        )
        nl.validate()
        return nl

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "Netlist":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def export_netlist(units, inputs, wiring=None) -> Netlist:
    """Flatten adder units and input populations into a Netlist.

    inputs: dict name -> ValueGrid (or a list, auto-named input0..).
    wiring: per unit, one (kind, name, delay) triple per input port where
    kind is "input" (a named population) or "unit" (that unit's reduce
    layer).  When omitted, ports consume the input populations in file
    order, unit by unit.
    """
    if not isinstance(inputs, dict):
        inputs = {f"input{i}": g for i, g in enumerate(inputs)}
    units = list(units)

    if wiring is None:
        names = list(inputs)
        if len(names) != sum(len(u.inputs) for u in units):
            raise ValueError("default wiring needs one input population per port")
        wiring = []
        k = 0
        for u in units:
            wiring.append([("input", names[k + p], 0) for p in range(len(u.inputs))])
            k += len(u.inputs)

    unit_by_name = {u.name: u for u in units}
    neurons: list[NeuronSpec] = []
    synapses: list[SynapseSpec] = []

    for name, grid in inputs.items():
        for i in range(grid.n):
            neurons.append(NeuronSpec(f"{name}[{i}]", LAYER_INPUT, 0))
    for u in units:
        neurons.extend(u.neuron_specs())

    for u, ports in zip(units, wiring):
        id_fns = []
        delays = []
        for p, (kind, src_name, delay) in enumerate(ports):
            if kind == "input":
                grid = inputs[src_name]
                id_fns.append(lambda i, s=src_name: f"{s}[{i}]")
            elif kind == "unit":
                grid = unit_by_name[src_name].output
                id_fns.append(lambda i, s=src_name: f"{s}.reduce[{i}]")
            else:
                raise ValueError(f"unknown wiring source kind {kind!r}")
            if grid.n != u.inputs[p].grid.n:
                raise ValueError(
                    f"port {p} of unit {u.name!r} expects {u.inputs[p].grid.n} "
                    f"bins but source {src_name!r} has {grid.n}"
                )
            delays.append(delay)
        synapses.extend(u.synapse_specs(id_fns, delays))

    meta = {
        "scale": {u.name: u.scale for u in units},
        "grids": {name: g.to_dict() for name, g in inputs.items()},
        "mode": units[0].mode if units else "nearest",
        "quantized": any(u.quantized for u in units),
        "unit_outputs": {u.name: u.output.to_dict() for u in units},
    }
    nl = Netlist(neurons=neurons, synapses=synapses, meta=meta)
    nl.validate()
    return nl


class NetlistRuntime:
    """Evaluates a netlist directly from its graph.

    Units are recovered from neuron-id prefixes only to get a layer-by-
    layer topological order; potentials, thresholds and the winner-takes-
    all all come from the serialized weights.  Delay-1 synapses read the
    previous tick's firing set, which the runtime buffers between calls.
    """

    def __init__(self, netlist: Netlist):
        netlist.validate()
        self.netlist = netlist
        self.by_id = {n.id: n for n in netlist.neurons}
        # incoming[dst] keeps file order so float accumulation matches the
        # builder's population order exactly.
        self.incoming: dict[str, list[SynapseSpec]] = {}
        for s in netlist.synapses:
            self.incoming.setdefault(s.dst, []).append(s)

        self.input_pops: dict[str, list[str]] = {}
        self.unit_neurons: dict[str, list[str]] = {}
        for n in netlist.neurons:
            base = n.id.split("[")[0]
            if n.layer == LAYER_INPUT:
                self.input_pops.setdefault(base.split(".")[0], []).append(n.id)
            else:
                self.unit_neurons.setdefault(base.split(".")[0], []).append(n.id)
        self._order = self._topo_order()
        self._prev_fired: set[str] = set()

    def _topo_order(self) -> list[str]:
        deps = {u: set() for u in self.unit_neurons}
        for s in self.netlist.synapses:
            if s.delay != 0:
                continue
            src_unit = s.src.split(".")[0]
            dst_unit = s.dst.split(".")[0]
            if (
                src_unit != dst_unit
                and src_unit in self.unit_neurons
                and dst_unit in self.unit_neurons
            ):
                deps[dst_unit].add(src_unit)
        order, ready = [], [u for u, d in deps.items() if not d]
        done = set()
        while ready:
            u = ready.pop(0)
            order.append(u)
            done.add(u)
            for v, d in deps.items():
                if v not in done and v not in ready and d <= done:
                    ready.append(v)
        if len(order) != len(deps):
            raise ValueError("netlist zero-delay unit graph has a cycle")
        return order

    def reset(self) -> None:
        self._prev_fired = set()

    def step(self, stimuli: dict) -> dict:
        """One tick.  stimuli maps input population name -> hot bin index.
        Returns {unit name: winning reduce bin} and updates the delay
        buffer.  Raises if any reduce layer fails to pick a single winner.
        """
        fired: set[str] = set()
        for name, hot in stimuli.items():
            fired.add(f"{name}[{hot}]")

        def potential(nid: str):
            pot = None
            for s in self.incoming.get(nid, ()):
                active = s.src in (fired if s.delay == 0 else self._prev_fired)
                if active:
                    pot = s.weight if pot is None else pot + s.weight
            return 0 if pot is None else pot

        winners: dict[str, int] = {}
        for unit in self._order:
            ids = self.unit_neurons[unit]
            agg = [i for i in ids if ".reduce[" not in i]
            red = [i for i in ids if ".reduce[" in i]
            for nid in agg:
                if potential(nid) >= self.by_id[nid].threshold:
                    fired.add(nid)
            hot = []
            for nid in red:
                if potential(nid) >= self.by_id[nid].threshold:
                    fired.add(nid)
                    hot.append(nid)
            if len(hot) != 1:
                raise AssertionError(f"unit {unit!r} reduce produced {len(hot)} winners")
            winners[unit] = int(hot[0].split("[")[1].rstrip("]"))
        self._prev_fired = fired
        return winners
