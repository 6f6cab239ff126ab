#pragma once

#include <ostream>
#include <string>

#include "spectral_ends/pipeline.hpp"

namespace spectral_ends {

/// JSON result documents. With `timing` false the output is a pure function of the
/// configuration, which makes runs comparable byte for byte.
std::string eigen_document(const EigenOutcome& out, bool timing = true);
std::string scan_document(const ScanOutcome& out, bool timing = true);
std::string config_document(const RunConfig& cfg);

/// CSV with header re,im,cond,logabsdet in row-major grid order; invalid nodes print nan.
void write_scan_csv(std::ostream& os, const ScanGrid& grid);

}  // namespace spectral_ends
