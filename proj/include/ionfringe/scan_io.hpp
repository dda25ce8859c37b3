#pragma once

#include <string>

#include "ionfringe/fitting.hpp"

namespace ionfringe {

// Scan file format: "# key=value" metadata comments (ions, background_cps,
// integration_s), then the header "u_tip_V,rate_cps,stderr_cps" and data
// rows. Rows come back sorted by voltage (stable, duplicates allowed);
// validation errors carry line numbers.
MeasuredScan load_scan(const std::string& path);

// Inverse of load_scan; writing and re-reading reproduces the scan exactly.
void save_scan(const std::string& path, const MeasuredScan& scan);

}  // namespace ionfringe
