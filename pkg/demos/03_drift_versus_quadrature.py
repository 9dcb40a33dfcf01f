"""Integrating a biased, noisy measurement: observer vs trapezoid and Simpson.

Runs 3000 s of simulated time (a few seconds of wall time).
"""

from dataclasses import replace

from intderiv import experiment1_spec, reference_noise, run_drift_study

spec = replace(
    experiment1_spec(noise=reference_noise(), horizon=3000.0, record_every=10),
    tag="drift_study",
)
trace, report = run_drift_study(spec)

# Any quadrature rule integrates the noise mean along with the signal, so its
# error grows linearly at that rate.  The observer's integral channel does not.
print(f"configured noise mean    {report.noise_mean}")
print(f"empirical noise mean     {report.empirical_noise_mean:.5f}")
print(f"trapezoid error slope    {report.trapezoid_slope:.5f} /s")
print(f"Simpson error slope      {report.simpson_slope:.5f} /s")
print(f"observer x1 error slope  {report.observer_slope:.2e} /s")
print(f"separation               {report.separation:.0f}x")

for t_mark in (500, 1000, 2000, 3000):
    k = int(t_mark / (trace.times[1] - trace.times[0]))
    print(f"t={t_mark:5d}  observer err {trace.errors[k, 0]:+.4f}   trapezoid err {trace.extras['err_baseline'][k]:+.3f}")
