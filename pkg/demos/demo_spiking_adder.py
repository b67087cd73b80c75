#!/usr/bin/env python3
"""Walk through one spiking adder: two [-1, 0, 1] inputs, a [-2..2]
output, and the aggregate/reduce mechanics that add 1 + 1."""

import numpy as np

from spikepid import build_adder, eval_unit, make_grid, one_hot

g_in = make_grid(-1, 1, 3)
g_out = make_grid(-2, 2, 5)
unit = build_adder([(g_in, 1, 1.0), (g_in, 1, 1.0)], g_out, mode="floor",
                   name="demo")

print("input grid :", list(g_in.values))
print("output grid:", list(g_out.values))
print(f"neurons    : {unit.pos_count} aggregate-pos + {unit.neg_count} "
      f"aggregate-neg + {unit.n_out} reduce = {unit.neuron_count} (= 2N+1)")
print("pos thresholds:", unit.thr_pos)
print()

# Add 1 + 1: both input populations spike at their top bin.
out, agg = eval_unit(unit, [one_hot(3, 2), one_hot(3, 2)])
pos_fired = [int(i) for i in np.flatnonzero(agg[: unit.pos_count])]
print("adding 1 + 1:")
print(f"  aggregate-pos potentials reach 2 -> neurons {pos_fired} all fire")
print(f"  reduce winner: bin {int(np.flatnonzero(out)[0])} "
      f"= value {g_out.values[int(np.flatnonzero(out)[0])]}")
print()

# Every pair, against plain arithmetic.
print("all nine input pairs (rows: first input, cols: second):")
table = unit.eval_all_pairs()
for i in range(3):
    row = [g_out.values[int(table[i, j])] for j in range(3)]
    print(f"  {g_in.values[i]:+.0f}: {row}")
print("\nsubtraction is the same circuit with the second input's weights "
      "negated:")
sub = build_adder([(g_in, 1, 1.0), (g_in, -1, 1.0)], g_out, name="sub")
print("  1 - (-1) ->", g_out.values[sub.winner_bin(2, 0)])
