"""Throughput boost of optimized caching over an optimized cacheless system.

Both systems get the same antennas, power, and pilot budget; each picks
its own best stream count.  The ratio of the two optimized effective
rates is the multiplicative boost that receiver-side caches buy.  At 32
antennas and 20 dB the boost is ~310% for ZF and ~430% for MF; at 64
antennas ~280% and ~380% (matching the ``fig2-*`` CLI presets).

Run: python demos/optimized_gains.py
"""

from ccdl.analytic import CsiCostModel
from ccdl.optimizer import optimized_gain

CSI = CsiCostModel(beta_tot=10.0, t_c=0.04, w_c=300e3)
G = 6

for L in (32, 64):
    print(f"\noptimized gain vs SNR at L={L}, G={G} (beta=10, Tc=40 ms, Wc=300 kHz)")
    print(" SNR   MF: gain (Q* vs Q'*)    ZF: gain (Q* vs Q'*)   RZF: gain (Q* vs Q'*)")
    for snr_db in range(0, 26, 5):
        p_t = 10.0 ** (snr_db / 10.0)
        cells = []
        for precoder in ("MF", "ZF", "RZF"):
            r = optimized_gain(precoder, G, L, p_t, CSI)
            cells.append(f"{r.gain:5.2f} ({r.cached.q_star:3d} vs {r.cacheless.q_star:3d})")
        print(f"  {snr_db:2d}   {cells[0]}        {cells[1]}       {cells[2]}")

print("\nreading the 20 dB row at L=32: caching multiplies ZF throughput ~3.1x and MF ~4.3x.")
print("The cache-aided side prefers fewer streams per group than the cacheless")
print("baseline: it pays G times the pilot cost per coherence block, but serves")
print("G groups at once.")
