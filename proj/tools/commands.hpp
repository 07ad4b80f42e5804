#pragma once

#include <string>
#include <vector>

#include "delaychain/config.hpp"

namespace delaychain::cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kDivergence = 3;
inline constexpr int kDiagnosticFailure = 4;

int run_simulate(KeyValueConfig cfg);
int run_hopf(KeyValueConfig cfg);
int run_scan(KeyValueConfig cfg);
int run_crosscorr(KeyValueConfig cfg);
int run_project(KeyValueConfig cfg);

}  // namespace delaychain::cli
