#pragma once

#include <filesystem>

#ifndef ACSIM_SOURCE_DIR
#error "ACSIM_SOURCE_DIR must point at the source tree"
#endif

namespace acsim::test {

inline std::filesystem::path source_path(const std::filesystem::path& relative) {
  return std::filesystem::path(ACSIM_SOURCE_DIR) / relative;
}

}  // namespace acsim::test
