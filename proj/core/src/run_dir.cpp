#include "tap/run_dir.hpp"

#include <cstdlib>

#include "tap/run_config.hpp"

namespace tap {

namespace fs = std::filesystem;

fs::path prepare_run_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw ConfigError("run dir exists and is not a directory: " + dir.string());
    }
    if (!fs::is_empty(dir) && !force) {
      throw ConfigError("run dir is not empty (use --force to reuse): " + dir.string());
    }
  } else {
    fs::create_directories(dir);
  }
  return dir;
}

fs::path resolve_run_dir(const std::string& arg, const std::string& fallback) {
  if (!arg.empty()) return fs::path(arg);
  if (const char* env = std::getenv("TAP_RUN_DIR"); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::path(fallback);
}

}  // namespace tap
