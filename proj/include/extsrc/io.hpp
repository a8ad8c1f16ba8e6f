// Small output helpers: atomic file replacement and CSV formatting shared by
// the dump routines and the CLI. Re-running a pipeline overwrites artifacts
// atomically instead of appending.

#pragma once

#include <string>
#include <vector>

namespace extsrc {

// Shortest round-trip decimal form of a double ("%.17g" trimmed).
std::string format_double(double v);

// Write content to path via a temp file + rename in the same directory.
void write_file_atomic(const std::string& path, const std::string& content);

// Rows of already-formatted cells; header first.
void write_csv_atomic(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

} // namespace extsrc
