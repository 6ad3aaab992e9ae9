#include <math.h>
#include <stdio.h>
#include "dwlab.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    DwlabStatus s_ = (call);                                               \
    if (s_ != DWLAB_STATUS_OK) {                                           \
      char msg[256];                                                       \
      dwlab_last_error_message(msg, sizeof msg);                           \
      fprintf(stderr, "%s failed: %d %s\n", #call, (int)s_, msg);          \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  DwlabParams p = {0.5, 0.3, 1.0, 0.0, 0.0};
  DwlabSummary s;
  CHECK(dwlab_summary(&p, &s));
  if (fabs(s.theta_star - 0.6956521739130435) > 1e-12) return 2;

  DwlabNoise noise = {DWLAB_NOISE_FAMILY_GAUSSIAN, 0.0};
  DwlabTrajectory *t = NULL;
  CHECK(dwlab_simulate(&p, &noise, 2000, 7, &t));
  DwlabLedger *l = NULL;
  CHECK(dwlab_ledger_compute(t, &p, &l));
  DwlabLedgerValues v;
  CHECK(dwlab_ledger_values(l, &v));
  if (v.n != 2000 || fabs(v.theta_hat - s.theta_star) > 0.1) return 3;

  DwlabParams bad = {1.5, 0.3, 1.0, 0.0, 0.0};
  if (dwlab_validate_params(&bad) != DWLAB_STATUS_STABILITY) return 4;
  if (dwlab_last_error_length() == 0) return 5;

  dwlab_ledger_free(l);
  dwlab_trajectory_free(t);
  printf("theta_hat=%.6f dw=%.6f\n", v.theta_hat, v.dw);
  return 0;
}
