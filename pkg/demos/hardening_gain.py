"""Fixed-stream-count comparison: the channel-hardening regime.

Keeping Q/L small preserves channel hardening (channel quantities
concentrate around deterministic values, easing CSI acquisition).  Here
both the cache-aided system (G=6) and the cacheless baseline run the
same Q = 8 streams at L = 64 antennas, and caching multiplies the
effective rate by ~400% (ZF) to beyond 540% (MF) around 15 dB.  The
``fig3-L64`` CLI preset emits this sweep as CSV.

Run: python demos/hardening_gain.py
"""

from ccdl.analytic import CsiCostModel, effective_gain

CSI = CsiCostModel(beta_tot=10.0, t_c=0.04, w_c=300e3)
G, Q, L = 6, 8, 64

print(f"effective gain over the cacheless system, Q={Q} on both sides, L={L}, G={G}")
print(" SNR     MF      ZF     RZF")
for snr_db in range(0, 26):
    p_t = 10.0 ** (snr_db / 10.0)
    row = [effective_gain(p, G, Q, Q, L, p_t, CSI) for p in ("MF", "ZF", "RZF")]
    if snr_db % 5 == 0 or snr_db == 15:
        print(f"  {snr_db:2d}   {row[0]:5.2f}   {row[1]:5.2f}   {row[2]:5.2f}")

print("\nat 15 dB: MF 5.46x, ZF 3.90x. The upper bound is G = 6: serving six")
print("groups at once with the same per-group multiplexing, minus the pilot")
print("overhead of acquiring six groups' composite CSI per coherence block.")
