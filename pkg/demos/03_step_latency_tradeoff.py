#!/usr/bin/env python3
"""How the reverse-step count N trades quality against latency.

Latency grows linearly in N while quality (LSD to clean) saturates, so an
SNR-adaptive schedule can spend steps only where they pay off.  The sweep
below reproduces both effects and then compares schedules under a forced
linear cost model, where the expected deltas have a closed form.
"""

from artifree import (
    NSchedule,
    SamplerConfig,
    ScheduleCase,
    evaluate_schedule,
    mix_at_snr,
    sweep_n,
)

from demo_audio import make_noise, make_speechlike

cases = []
for i, snr in enumerate((-12.0, -12.0, 0.0)):
    clean = make_speechlike(seed=400 + i, duration=0.8)
    noisy = mix_at_snr(clean, make_noise(seed=500 + i), snr, seed=i)
    cases.append(ScheduleCase(snr_db=snr, noisy=noisy, clean=clean))

cfg = SamplerConfig(noise_sigma0=1.2, decay=0.6, halluc_rate=1.0, seed=7)
print("Sweep over N (medians across utterances):")
print(f"{'N':>4} {'RTF':>10} {'LSD':>8} {'artifact score':>15}")
for row in sweep_n(cases, [5, 10, 20, 30, 40], cfg, ensemble_size=3, timing_repeats=3):
    print(f"{row['n']:>4} {row['rtf']:>10.4f} {row['lsd']:>8.3f} {row['artifact_score']:>15.6f}")
print("\nRTF rises ~linearly with N; LSD improves then saturates; the ensemble")
print("artifact score falls as the stochastic tail shrinks.\n")

# one utterance per SNR band -> closed-form deltas under cost = N
band_cases = [ScheduleCase(snr_db=s) for s in (0.0, 5.0, 10.0, 15.0)]
report = evaluate_schedule(
    band_cases,
    [NSchedule((20, 30, 20, 10)), NSchedule((40, 30, 20, 10)), NSchedule.fixed(10)],
    baseline=NSchedule.fixed(30),
    cost_model="linear",
)
print("Schedules vs fixed N=30 under unit per-step cost (uniform band mix):")
print(f"{'schedule':>16} {'mean cost':>10} {'delta':>9}")
for row in (report.baseline, *report.rows):
    print(f"{row.label:>16} {row.rtf:>10.1f} {row.rtf_delta_pct:>8.1f}%")
