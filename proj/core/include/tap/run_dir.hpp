#pragma once

#include <filesystem>
#include <string>

namespace tap {

// Prepares a run directory for training output.  Creates the directory
// (and parents) when absent.  An existing non-empty directory is refused
// unless `force` is set, in which case its contents are left in place and
// files are overwritten as the run proceeds.
//
// Throws ConfigError when the path exists but is not a directory, or when
// it is non-empty and `force` is false.
std::filesystem::path prepare_run_dir(const std::filesystem::path& dir, bool force);

// Resolves the run directory from an explicit argument, falling back to the
// TAP_RUN_DIR environment variable, then to `fallback`.
std::filesystem::path resolve_run_dir(const std::string& arg, const std::string& fallback);

}  // namespace tap
